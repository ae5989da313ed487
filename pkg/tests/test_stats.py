import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from yieldsign.classifiers import ClassifierSpec, train
from yieldsign.errors import DataError
from yieldsign.ingest import Dataset
from yieldsign.stats import (
    correlation_report,
    cycle_hypothesis_matrix,
    heatmap_to_csv,
    hit_rate,
    importance_heatmap,
    paired_t_test,
    pearson,
)

# Cross-country hit-rate matrices: rows = cycle trained on, columns =
# target cycle tested on.
COUNTRY_MATRICES = {
    "JPN": [[0.696, 0.614, 0.661], [0.772, 0.649, 0.670], [0.684, 0.579, 0.617]],
    "AUS": [[0.778, 0.832, 0.774], [0.731, 0.835, 0.843], [0.801, 0.660, 0.678]],
    "GRM": [[0.860, 0.874, 0.861], [0.854, 0.898, 0.878], [0.877, 0.884, 0.861]],
    "CND": [[0.848, 0.881, 0.852], [0.830, 0.874, 0.843], [0.848, 0.828, 0.809]],
    "UK": [[0.860, 0.874, 0.852], [0.836, 0.881, 0.843], [0.865, 0.786, 0.843]],
}

REFERENCE_DIFFERENCES = [0.175, 0.046, 0.014, 0.070, 0.095]


class TestHitRate:
    def test_identical(self):
        assert hit_rate([1, -1, 1], [1, -1, 1]) == 1.0

    def test_opposite(self):
        assert hit_rate([1, -1], [-1, 1]) == 0.0

    def test_seven_of_eight(self):
        predictions = [1, 1, 1, 1, -1, -1, -1, -1]
        truth = [1, 1, 1, 1, -1, -1, -1, 1]
        assert hit_rate(predictions, truth) == 0.875

    def test_length_mismatch(self):
        with pytest.raises(DataError, match="mismatch"):
            hit_rate([1], [1, -1])

    def test_empty(self):
        with pytest.raises(DataError, match="empty"):
            hit_rate([], [])


class TestPairedTTest:
    def test_reference_vector(self):
        result = paired_t_test(REFERENCE_DIFFERENCES, alpha=0.10)
        assert result.t == pytest.approx(2.935, abs=1e-3)
        assert result.df == 4
        assert result.significant

    def test_zero_variance_errors(self):
        with pytest.raises(DataError, match="zero-variance"):
            paired_t_test([0.3, 0.3, 0.3])

    def test_negated_vector_flips_sign(self):
        result = paired_t_test([-e for e in REFERENCE_DIFFERENCES], alpha=0.10)
        assert result.t == pytest.approx(-2.935, abs=1e-3)
        assert not result.significant

    def test_single_difference_errors(self):
        with pytest.raises(DataError, match="at least 2"):
            paired_t_test([0.5])

    @given(st.integers(0, 5_000))
    @settings(max_examples=60, deadline=None)
    def test_antisymmetry_exact(self, seed):
        rng = np.random.default_rng(seed)
        E = rng.normal(size=8)
        if E.std(ddof=1) == 0:
            return
        assert paired_t_test(E).t == -paired_t_test(-E).t

    @given(st.integers(0, 5_000), st.floats(0.001, 1000.0))
    @settings(max_examples=60, deadline=None)
    def test_scale_invariance(self, seed, c):
        rng = np.random.default_rng(seed)
        E = rng.normal(size=6)
        if E.std(ddof=1) == 0:
            return
        assert paired_t_test(c * E).t == pytest.approx(paired_t_test(E).t, abs=1e-12)


class TestTQuantileAgainstScipy:
    def test_matches_scipy_ppf(self):
        scipy_stats = pytest.importorskip("scipy.stats")
        from yieldsign.tdist import student_t_quantile

        for df in (1, 2, 4, 7, 30, 200):
            for p in (0.6, 0.75, 0.9, 0.95, 0.99, 0.25, 0.05):
                ours = student_t_quantile(p, df)
                reference = scipy_stats.t.ppf(p, df)
                assert ours == pytest.approx(reference, abs=1e-6), (p, df)

    def test_cdf_matches_scipy(self):
        scipy_stats = pytest.importorskip("scipy.stats")
        from yieldsign.tdist import student_t_cdf

        for df in (1, 3, 4, 12):
            for t in (-4.0, -1.2, 0.0, 0.7, 2.935, 6.0):
                assert student_t_cdf(t, df) == pytest.approx(
                    scipy_stats.t.cdf(t, df), abs=1e-10
                )


class TestCycleHypothesisMatrix:
    def test_reproduces_reference_scores(self):
        result = cycle_hypothesis_matrix(
            {c: np.array(m) for c, m in COUNTRY_MATRICES.items()}, alpha=0.10
        )
        expected = {
            (0, 1): 0.181,
            (0, 2): -1.064,
            (1, 0): 1.643,
            (1, 2): 2.935,
            (2, 0): -2.27,
            (2, 1): -1.845,
        }
        for (i, j), value in expected.items():
            assert result.t[i, j] == pytest.approx(value, abs=0.01), (i, j)

    def test_flags_exactly_the_mc2_cells(self):
        result = cycle_hypothesis_matrix(
            {c: np.array(m) for c, m in COUNTRY_MATRICES.items()}, alpha=0.10
        )
        flagged = {(i, j) for i in range(3) for j in range(3) if result.significant[i, j]}
        assert flagged == {(1, 0), (1, 2)}

    def test_worked_difference_vector(self):
        # The (appropriate MC2, alternative MC3) differences across
        # countries must equal the reference vector.
        E = [
            COUNTRY_MATRICES[c][1][1] - COUNTRY_MATRICES[c][2][1]
            for c in ("AUS", "CND", "GRM", "JPN", "UK")
        ]
        np.testing.assert_allclose(E, REFERENCE_DIFFERENCES, atol=1e-12)

    def test_identical_rows_surface_zero_variance_with_cell(self):
        flat = {c: np.full((3, 3), 0.8) for c in ("A", "B", "C")}
        with pytest.raises(DataError, match="appropriate MC1"):
            cycle_hypothesis_matrix(flat)

    def test_wrong_shape_rejected(self):
        with pytest.raises(DataError, match="3x3"):
            cycle_hypothesis_matrix({"UK": np.zeros((2, 3))})

    def test_csv_export(self, tmp_path):
        result = cycle_hypothesis_matrix(
            {c: np.array(m) for c, m in COUNTRY_MATRICES.items()}
        )
        path = tmp_path / "table3.csv"
        result.to_csv(path)
        text = path.read_text()
        assert "2.9347*" in text and "-1.8450" in text


class TestPearson:
    def test_affine_dependence(self):
        x = np.arange(10.0)
        assert pearson(x, 2 * x + 1) == pytest.approx(1.0, abs=1e-12)

    def test_negative(self):
        x = np.arange(10.0)
        assert pearson(x, -x) == pytest.approx(-1.0, abs=1e-12)

    def test_hand_computed(self):
        assert pearson([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-12)

    def test_constant_errors(self):
        with pytest.raises(DataError, match="constant"):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    @given(st.integers(0, 5_000))
    @settings(max_examples=60, deadline=None)
    def test_bounds_and_affine_invariance(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=30)
        y = rng.normal(size=30)
        r = pearson(x, y)
        assert -1.0 <= r <= 1.0
        assert pearson(3.0 * x + 2.0, y) == pytest.approx(r, abs=1e-12)


class TestCorrelationReport:
    def test_identical_series(self):
        rng = np.random.default_rng(0)
        level = rng.normal(size=120)
        report = correlation_report({"FF1": (level, level.copy())})
        assert report.pcc["FF1"] == pytest.approx(1.0, abs=1e-12)
        assert report.mic["FF1"] >= 0.99

    def test_independent_series_low_pcc(self):
        rng = np.random.default_rng(1)
        report = correlation_report(
            {"GM1": (rng.normal(size=500), rng.normal(size=500))}
        )
        assert abs(report.pcc["GM1"]) <= 0.15

    def test_export_preserves_code_order(self, tmp_path):
        rng = np.random.default_rng(2)
        pairs = {
            code: (rng.normal(size=60), rng.normal(size=60))
            for code in ("I2", "I1", "GM2", "FF1")
        }
        report = correlation_report(pairs)
        assert report.codes == ["I2", "I1", "GM2", "FF1"]
        path = tmp_path / "table1.csv"
        report.to_csv(path)
        header = path.read_text().splitlines()[0]
        assert header == ",I2,I1,GM2,FF1"


class TestImportanceHeatmap:
    def make_model(self, seed, country, cycle, planted=0):
        rng = np.random.default_rng(seed)
        y = rng.choice([-1, 1], size=150)
        X = rng.normal(size=(150, 3))
        X[:, planted] = y + 0.1 * rng.normal(size=150)
        data = Dataset(
            months=np.arange(150),
            X=X,
            y=y,
            feature_names=["a", "b", "c"],
            country=country,
            cycle=cycle,
        )
        return train(ClassifierSpec.make("GradientBoosting"), data, seed=seed)

    def test_rows_sum_to_one_and_planted_feature_leads(self, tmp_path):
        models = {
            (country, cycle): self.make_model(i, country, cycle)
            for i, (country, cycle) in enumerate(
                (c, mc) for c in ("UK", "GRM") for mc in ("MC1", "MC2")
            )
        }
        table = importance_heatmap(models)
        for cycle, rows in table.items():
            for country, weights in rows.items():
                assert sum(weights.values()) == pytest.approx(1.0, abs=1e-6)
                assert all(v >= 0 for v in weights.values())
                assert max(weights, key=weights.get) == "a"
        paths = heatmap_to_csv(table, tmp_path)
        assert sorted(p.name for p in paths) == ["importance_MC1.csv", "importance_MC2.csv"]

    def test_unsupported_model_errors(self):
        rng = np.random.default_rng(3)
        y = rng.choice([-1, 1], size=60)
        data = Dataset(
            months=np.arange(60),
            X=rng.normal(size=(60, 2)),
            y=y,
            feature_names=["a", "b"],
            country="UK",
            cycle="MC1",
        )
        model = train(ClassifierSpec.make("Ridge"), data, seed=0)
        with pytest.raises(DataError, match="importances"):
            importance_heatmap({("UK", "MC1"): model})
