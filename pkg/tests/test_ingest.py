import numpy as np
import pytest

from yieldsign.asg import AsgParams
from yieldsign.cycles import BusinessCycleCalendar, CyclePartition, partition_months
from yieldsign.errors import DataError
from yieldsign.ingest import (
    AlignedPanel,
    Dataset,
    FEATURE_PRESETS,
    IndicatorSeries,
    LabelSeries,
    assemble_datasets,
    build_labels,
    build_panel,
    codes_for_preset,
    load_indicator_csv,
)
from yieldsign.months import parse_month


def write_csv(path, rows, header="month,value"):
    path.write_text(header + "\n" + "\n".join(rows) + ("\n" if rows else ""))


class TestLoadIndicatorCsv:
    def test_minimal_valid_file(self, tmp_path):
        path = tmp_path / "UK_FF1.csv"
        write_csv(path, ["1980-01,1.0", "1980-02,1.1"])
        series = load_indicator_csv(path, "UK", "FF1")
        assert len(series.months) == 2
        assert series.months[0] == parse_month("1980-01")
        np.testing.assert_allclose(series.values, [1.0, 1.1])

    def test_gap_names_missing_month(self, tmp_path):
        path = tmp_path / "UK_FF1.csv"
        write_csv(path, ["1980-01,1.0", "1980-03,1.1"])
        with pytest.raises(DataError, match="1980-02"):
            load_indicator_csv(path, "UK", "FF1")

    def test_nan_value_reports_row(self, tmp_path):
        path = tmp_path / "UK_FF1.csv"
        write_csv(path, ["1980-01,1.0", "1980-02,NaN"])
        with pytest.raises(DataError, match=":3:"):
            load_indicator_csv(path, "UK", "FF1")

    def test_duplicate_month(self, tmp_path):
        path = tmp_path / "UK_FF1.csv"
        write_csv(path, ["1980-01,1.0", "1980-01,1.1"])
        with pytest.raises(DataError, match="duplicate month 1980-01"):
            load_indicator_csv(path, "UK", "FF1")

    def test_unparseable_month_reports_row(self, tmp_path):
        path = tmp_path / "UK_FF1.csv"
        write_csv(path, ["1980-01,1.0", "January,1.1"])
        with pytest.raises(DataError, match=":3:"):
            load_indicator_csv(path, "UK", "FF1")

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="missing data file"):
            load_indicator_csv(tmp_path / "UK_FF1.csv", "UK", "FF1")

    def test_out_of_order_rows_are_sorted(self, tmp_path):
        path = tmp_path / "UK_FF1.csv"
        write_csv(path, ["1980-02,2.0", "1980-01,1.0"])
        series = load_indicator_csv(path, "UK", "FF1")
        np.testing.assert_allclose(series.values, [1.0, 2.0])


class TestBuildLabels:
    def yields(self, values, start="1980-01"):
        months = np.arange(parse_month(start), parse_month(start) + len(values))
        return IndicatorSeries("US", "MP4", months, np.asarray(values, dtype=float))

    def test_flat_and_final_months_dropped(self):
        labels = build_labels(self.yields([2.0, 2.1, 2.1, 1.9]))
        assert list(labels.labels) == [1, -1]
        assert list(labels.months) == [parse_month("1980-01"), parse_month("1980-03")]

    def test_strictly_increasing(self):
        labels = build_labels(self.yields(np.linspace(1.0, 2.0, 10)))
        assert len(labels.labels) == 9
        assert np.all(labels.labels == 1)

    def test_constant_series_gives_empty_labels(self):
        labels = build_labels(self.yields([3.0, 3.0, 3.0]))
        assert len(labels.labels) == 0

    def test_short_series_errors(self):
        with pytest.raises(DataError, match="at least 2"):
            build_labels(self.yields([3.0]))


class TestSeriesValidation:
    def test_gap_rejected(self):
        with pytest.raises(DataError, match="missing month"):
            IndicatorSeries("UK", "FF1", np.array([0, 2]), np.array([1.0, 2.0]))

    def test_nonfinite_rejected(self):
        with pytest.raises(DataError, match="non-finite"):
            IndicatorSeries("UK", "FF1", np.array([0, 1]), np.array([1.0, np.inf]))


def toy_panel_and_labels(n=60, seed=0):
    rng = np.random.default_rng(seed)
    start = parse_month("1980-01")
    series = {}
    for code in codes_for_preset("full"):
        values = 100.0 + np.cumsum(rng.normal(size=n))
        series[code] = IndicatorSeries("UK", code, np.arange(start, start + n), values)
    panel = build_panel(series, AsgParams(), "full")
    labels = build_labels(series["MP4"]).restrict(panel.months)
    return panel, labels


class TestBuildPanel:
    def test_full_preset_has_17_columns(self):
        panel, _ = toy_panel_and_labels()
        assert panel.feature_names == FEATURE_PRESETS["full"]
        assert panel.matrix.shape[1] == 17
        month_col = panel.matrix[:, panel.feature_names.index("Month")]
        assert set(np.unique(month_col)) <= set(range(1, 13))

    def test_base_preset_is_two_mp4_columns(self):
        rng = np.random.default_rng(1)
        start = parse_month("1980-01")
        values = 100.0 + np.cumsum(rng.normal(size=60))
        series = {"MP4": IndicatorSeries("UK", "MP4", np.arange(start, start + 60), values)}
        panel = build_panel(series, AsgParams(), "base")
        assert panel.feature_names == ["MP4_L", "MP4_C"]
        assert panel.matrix.shape[1] == 2

    def test_excl_mp4_has_no_mp4_columns(self):
        rng = np.random.default_rng(2)
        start = parse_month("1980-01")
        series = {}
        for code in codes_for_preset("excl_mp4"):
            values = 100.0 + np.cumsum(rng.normal(size=60))
            series[code] = IndicatorSeries("UK", code, np.arange(start, start + 60), values)
        panel = build_panel(series, AsgParams(), "excl_mp4")
        assert not any(name.startswith("MP4") for name in panel.feature_names)
        assert len(panel.feature_names) == 15

    def test_missing_code_errors(self):
        with pytest.raises(DataError, match="missing indicator series"):
            build_panel({}, AsgParams(), "base")

    def test_no_lookahead_in_features(self):
        # Perturb the far future gently: every feature value at earlier
        # months must remain bit-identical as long as the perturbation
        # does not shift the batch outlier/shift statistics.
        rng = np.random.default_rng(3)
        start = parse_month("1980-01")
        n = 80
        base_values = {
            code: 100.0 + np.cumsum(rng.normal(size=n)) for code in codes_for_preset("full")
        }

        def panel_for(values_by_code):
            series = {
                code: IndicatorSeries("UK", code, np.arange(start, start + n), v)
                for code, v in values_by_code.items()
            }
            return build_panel(series, AsgParams(), "full")

        panel = panel_for(base_values)
        perturbed = {k: v.copy() for k, v in base_values.items()}
        for v in perturbed.values():
            v[-1] += 1e-7
        alt = panel_for(perturbed)
        np.testing.assert_array_equal(panel.matrix[:-1], alt.matrix[:-1])


class TestAssembleDatasets:
    def partition_for(self, months, labels_cycle):
        return CyclePartition(country="UK", labels={int(m): c for m, c in zip(months, labels_cycle)})

    def test_three_singleton_cycles(self):
        panel, labels = toy_panel_and_labels()
        months = labels.months[:3]
        labels3 = LabelSeries("UK", months, labels.labels[:3])
        partition = self.partition_for(months, ["MC1", "MC2", "MC3"])
        datasets, diag = assemble_datasets(panel, labels3, partition)
        assert {k: len(v) for k, v in datasets.items()} == {"MC1": 1, "MC2": 1, "MC3": 1}
        assert diag.dropped_unlabeled == 0

    def test_unpartitioned_month_dropped_and_counted(self):
        panel, labels = toy_panel_and_labels()
        months = labels.months[:3]
        labels3 = LabelSeries("UK", months, labels.labels[:3])
        partition = self.partition_for(months[:2], ["MC1", "MC2"])
        datasets, diag = assemble_datasets(panel, labels3, partition)
        assert diag.dropped_unlabeled == 1
        assert "MC3" in diag.empty_cycles

    def test_all_in_one_cycle_reports_empties(self):
        panel, labels = toy_panel_and_labels()
        partition = self.partition_for(labels.months, ["MC2"] * len(labels.months))
        datasets, diag = assemble_datasets(panel, labels, partition)
        assert set(datasets) == {"MC2"}
        assert sorted(diag.empty_cycles) == ["MC1", "MC3"]

    def test_partition_count_conservation(self):
        panel, labels = toy_panel_and_labels(seed=5)
        rng = np.random.default_rng(7)
        cycle_choices = rng.choice(["MC1", "MC2", "MC3", "none"], size=len(labels.months))
        partition = CyclePartition(
            country="UK",
            labels={
                int(m): c
                for m, c in zip(labels.months, cycle_choices)
                if c != "none"
            },
        )
        datasets, diag = assemble_datasets(panel, labels, partition)
        total_routed = sum(diag.counts.values())
        assert total_routed + diag.dropped_unlabeled == len(labels.months)

    def test_label_month_outside_panel_errors(self):
        panel, labels = toy_panel_and_labels()
        bad_month = int(panel.months[0]) - 1
        bad = LabelSeries("UK", np.array([bad_month]), np.array([1]))
        partition = self.partition_for([bad_month], ["MC1"])
        with pytest.raises(DataError, match="not in panel"):
            assemble_datasets(panel, bad, partition)


class TestDatasetRoundTrip:
    def test_json_round_trip_is_bit_identical(self):
        panel, labels = toy_panel_and_labels(seed=11)
        partition = CyclePartition(
            country="UK", labels={int(m): "MC2" for m in labels.months}
        )
        datasets, _ = assemble_datasets(panel, labels, partition)
        dataset = datasets["MC2"]
        clone = Dataset.from_json(dataset.to_json())
        np.testing.assert_array_equal(dataset.X, clone.X)
        np.testing.assert_array_equal(dataset.y, clone.y)
        np.testing.assert_array_equal(dataset.months, clone.months)
        assert dataset.feature_names == clone.feature_names
        assert dataset.X.tobytes() == clone.X.tobytes()
