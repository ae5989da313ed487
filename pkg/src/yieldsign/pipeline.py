"""End-to-end orchestration: ingest, transform, partition, train,
select, and report.

Everything here is a deterministic function of the input files and the
seed: sub-seeds are derived per (country, cycle, classifier, fold), so
serial and parallel execution produce byte-identical reports.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from .classifiers import (
    ClassifierSpec,
    DEFAULT_REGISTRY_SPECS,
    REGISTRY,
    cross_validate,
    derive_seed,
    train,
)
from .config import Config
from .cycles import CYCLE_LABELS, load_calendar_csv, partition_months
from .ensemble import (
    AggregateReport,
    SelectionSet,
    VotingEnsemble,
    build_level1,
    build_level2,
    evaluate_overall,
)
from .errors import DataError
from .ingest import (
    AssemblyDiagnostics,
    Dataset,
    assemble_datasets,
    build_labels,
    build_panel,
    codes_for_preset,
    load_indicator_csv,
)
from .stats import cycle_hypothesis_matrix, heatmap_to_csv, importance_heatmap

REPORT_FORMAT_VERSION = 1


@dataclass
class CountryData:
    country: str
    datasets: dict[str, Dataset]
    diagnostics: AssemblyDiagnostics


def prepare_country(config: Config, country: str) -> CountryData:
    """Load, transform, label and partition one country's data."""
    codes = codes_for_preset(config.feature_preset)
    series = {}
    for code in codes:
        path = config.data_dir / f"{country}_{code}.csv"
        series[code] = load_indicator_csv(path, country, code).clip(config.start, config.end)
    labels = build_labels(series["MP4"])
    panel = build_panel(series, config.asg, config.feature_preset)
    labels = labels.restrict(panel.months)
    calendar = load_calendar_csv(config.data_dir / f"{country}_cycles.csv", country)
    partition = partition_months(calendar, config.start, config.end)
    datasets, diagnostics = assemble_datasets(panel, labels, partition)
    return CountryData(country=country, datasets=datasets, diagnostics=diagnostics)


@dataclass
class PipelineResult:
    """Everything `run` produces, ready for serialization."""

    report: AggregateReport
    level1_selections: dict[str, dict[str, SelectionSet]]
    level2_selections: dict[str, SelectionSet]
    test_matrices: dict[str, np.ndarray]
    matched_tests: dict[str, dict[str, tuple[int, int]]]
    diagnostics: dict[str, dict]
    skipped: list[dict] = field(default_factory=list)
    seed: int = 0
    feature_preset: str = "full"
    target_country: str = "US"
    threshold: float = 0.75

    def to_dict(self) -> dict:
        return {
            "format": "yieldsign-report",
            "version": REPORT_FORMAT_VERSION,
            "seed": self.seed,
            "feature_preset": self.feature_preset,
            "target_country": self.target_country,
            "threshold": self.threshold,
            **self.report.to_dict(),
            "level1": {
                country: {cycle: sel.to_dict() for cycle, sel in sorted(by_cycle.items())}
                for country, by_cycle in sorted(self.level1_selections.items())
            },
            "level2": {
                cycle: sel.to_dict() for cycle, sel in sorted(self.level2_selections.items())
            },
            "test_matrix": {
                country: [
                    [None if np.isnan(v) else v for v in row] for row in matrix.tolist()
                ]
                for country, matrix in sorted(self.test_matrices.items())
            },
            "matched_tests": {
                country: {
                    cycle: {"correct": c, "total": t}
                    for cycle, (c, t) in sorted(by_cycle.items())
                }
                for country, by_cycle in sorted(self.matched_tests.items())
            },
            "skipped": self.skipped,
            "diagnostics": dict(sorted(self.diagnostics.items())),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _level1_for_country(
    config: Config, country: str, registry: tuple[ClassifierSpec, ...]
) -> tuple[str, dict[str, VotingEnsemble], dict[str, SelectionSet], dict, list[dict]]:
    data = prepare_country(config, country)
    ensembles: dict[str, VotingEnsemble] = {}
    selections: dict[str, SelectionSet] = {}
    skipped: list[dict] = []
    for cycle in CYCLE_LABELS:
        dataset = data.datasets.get(cycle)
        if dataset is None:
            skipped.append({"country": country, "cycle": cycle, "reason": "empty dataset"})
            continue
        try:
            ensemble, selection, _ = build_level1(
                country,
                cycle,
                dataset,
                list(registry),
                k=config.cv.k,
                seed=config.cv.seed,
                grids=config.grids,
                cv_mode=config.cv.mode,
            )
        except DataError as exc:
            skipped.append({"country": country, "cycle": cycle, "reason": str(exc)})
            continue
        ensembles[cycle] = ensemble
        selections[cycle] = selection
    return country, ensembles, selections, data.diagnostics.to_dict(), skipped


def run_pipeline(config: Config, jobs: int = 1) -> PipelineResult:
    """Execute the full training/selection/evaluation pipeline."""
    registry = DEFAULT_REGISTRY_SPECS
    results = Parallel(n_jobs=jobs)(
        delayed(_level1_for_country)(config, country, registry)
        for country in sorted(config.countries)
    )

    level1: dict[str, dict[str, VotingEnsemble]] = {}
    level1_selections: dict[str, dict[str, SelectionSet]] = {}
    diagnostics: dict[str, dict] = {}
    skipped: list[dict] = []
    for country, ensembles, selections, diag, country_skips in results:
        level1[country] = ensembles
        level1_selections[country] = selections
        diagnostics[country] = diag
        skipped.extend(country_skips)

    target = prepare_country(config, config.target_country)
    diagnostics[config.target_country] = target.diagnostics.to_dict()

    # Full cross-cycle test matrix per country: rows are the cycle the
    # ensemble was trained on, columns the target cycle it is tested on.
    test_matrices: dict[str, np.ndarray] = {}
    matched: dict[str, dict[str, tuple[int, int]]] = {}
    for country in sorted(level1):
        matrix = np.full((3, 3), np.nan)
        matched[country] = {}
        for i, train_cycle in enumerate(CYCLE_LABELS):
            vc = level1[country].get(train_cycle)
            if vc is None:
                continue
            for j, test_cycle in enumerate(CYCLE_LABELS):
                dataset = target.datasets.get(test_cycle)
                if dataset is None:
                    continue
                predictions = vc.predict(dataset.X)
                correct = int(np.sum(predictions == dataset.y))
                matrix[i, j] = correct / len(dataset)
                if i == j:
                    matched[country][train_cycle] = (correct, len(dataset))
        test_matrices[country] = matrix

    level2: dict[str, VotingEnsemble] = {}
    level2_selections: dict[str, SelectionSet] = {}
    rejected: list[str] = []
    for cycle in CYCLE_LABELS:
        candidates = [
            level1[country][cycle]
            for country in sorted(level1)
            if cycle in level1[country]
        ]
        if not candidates:
            skipped.append(
                {"country": "*", "cycle": cycle, "reason": "no level-1 ensembles"}
            )
            continue
        dataset = target.datasets.get(cycle)
        if dataset is None:
            raise DataError(
                f"target country {config.target_country} has no data for cycle {cycle}"
            )
        ensemble, selection = build_level2(
            cycle, candidates, dataset, threshold=config.threshold
        )
        level2_selections[cycle] = selection
        if ensemble is None:
            rejected.append(cycle)
        else:
            level2[cycle] = ensemble

    if not level2:
        raise DataError("every cycle was rejected by the level-2 quality gate")
    report = evaluate_overall(level2, target.datasets)
    report.rejected_cycles = rejected
    report.selection_trace = [
        sel for by_cycle in level1_selections.values() for sel in by_cycle.values()
    ] + list(level2_selections.values())

    return PipelineResult(
        report=report,
        level1_selections=level1_selections,
        level2_selections=level2_selections,
        test_matrices=test_matrices,
        matched_tests=matched,
        diagnostics=diagnostics,
        skipped=skipped,
        seed=config.cv.seed,
        feature_preset=config.feature_preset,
        target_country=config.target_country,
        threshold=config.threshold,
    )


def write_run_outputs(result: PipelineResult, config: Config) -> list[Path]:
    """Serialize the report and the table-shaped CSV exports."""
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    written = []

    report_path = out / "report.json"
    report_path.write_text(result.to_json())
    written.append(report_path)

    # Cycle-matched hit rates per training country, plus micro-average.
    table2 = out / "table2.csv"
    with open(table2, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["country"] + [f"target_{c}" for c in CYCLE_LABELS] + ["aggregate"])
        for country in sorted(result.matched_tests):
            row = [country]
            total_correct = total_n = 0
            for cycle in CYCLE_LABELS:
                if cycle in result.matched_tests[country]:
                    c, t = result.matched_tests[country][cycle]
                    row.append(f"{c / t:.4f}")
                    total_correct += c
                    total_n += t
                else:
                    row.append("")
            row.append(f"{total_correct / total_n:.4f}" if total_n else "")
            writer.writerow(row)
    written.append(table2)

    complete = {
        country: matrix
        for country, matrix in result.test_matrices.items()
        if not np.isnan(matrix).any()
    }
    if len(complete) >= 2:
        try:
            matrix = cycle_hypothesis_matrix(complete)
        except DataError:
            matrix = None
        if matrix is not None:
            table3 = out / "table3.csv"
            matrix.to_csv(table3)
            written.append(table3)

    written.extend(write_importance_outputs(config, out))
    return written


def write_importance_outputs(config: Config, out: Path) -> list[Path]:
    """Appendix-style importance tables from per-(country, cycle) GBC fits."""
    models = {}
    spec = ClassifierSpec.make("GradientBoosting")
    for country in sorted(config.countries):
        data = prepare_country(config, country)
        for cycle, dataset in sorted(data.datasets.items()):
            models[(country, cycle)] = train(
                spec, dataset, derive_seed(config.cv.seed, country, cycle, "importance")
            )
    if not models:
        return []
    out.mkdir(parents=True, exist_ok=True)
    return heatmap_to_csv(importance_heatmap(models), out)


def savgol_sweep(
    config: Config, country: str, windows: list[int], orders: list[int]
) -> tuple[list[dict], list[str]]:
    """Cross-validation hit rates per (sg params, cycle, classifier kind).

    Invalid (window, order) pairs - even windows or order >= window -
    are skipped and reported in the notes list.
    """
    rows: list[dict] = []
    notes: list[str] = []
    for window in windows:
        for order in orders:
            if window % 2 == 0 or window < 1 or order < 0 or order >= window:
                notes.append(f"skipped invalid pair (window={window}, order={order})")
                continue
            sweep_config = Config(
                data_dir=config.data_dir,
                countries=config.countries,
                target_country=config.target_country,
                output_dir=config.output_dir,
                start=config.start,
                end=config.end,
                asg=type(config.asg)(
                    window=config.asg.window,
                    cap=config.asg.cap,
                    sg_window=window,
                    sg_order=order,
                ),
                cv=config.cv,
                grids=config.grids,
                threshold=config.threshold,
                feature_preset=config.feature_preset,
            )
            data = prepare_country(sweep_config, country)
            for cycle in CYCLE_LABELS:
                dataset = data.datasets.get(cycle)
                if dataset is None:
                    continue
                for kind in REGISTRY:
                    spec = ClassifierSpec.make(kind)
                    try:
                        report = cross_validate(
                            spec,
                            dataset,
                            k=config.cv.k,
                            seed=derive_seed(config.cv.seed, country, cycle),
                            mode=config.cv.mode,
                        )
                    except DataError as exc:
                        notes.append(f"({window},{order}) {cycle} {kind}: {exc}")
                        continue
                    rows.append(
                        {
                            "sg_window": window,
                            "sg_order": order,
                            "country": country,
                            "cycle": cycle,
                            "kind": kind,
                            "mean_hit_rate": report.mean_hit_rate,
                        }
                    )
    return rows, notes
