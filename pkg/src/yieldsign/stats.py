"""Statistical analyses: hit rates, paired t-tests across countries,
correlation screening of the feature pairs, and importance tables."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classifiers import TrainedModel, feature_importance
from .errors import DataError
from .mic import mic
from .tdist import student_t_quantile

CYCLES = ("MC1", "MC2", "MC3")


def hit_rate(predictions, truth) -> float:
    """Fraction of exact label matches."""
    predictions = np.asarray(predictions)
    truth = np.asarray(truth)
    if predictions.shape != truth.shape:
        raise DataError(
            f"length mismatch: {predictions.shape} predictions vs {truth.shape} truth"
        )
    if predictions.size == 0:
        raise DataError("cannot compute a hit rate on empty inputs")
    return float(np.mean(predictions == truth))


@dataclass
class TTestResult:
    """One-tailed paired t-test of H0: mean difference = 0 vs H1: > 0."""

    differences: list[float]
    t: float
    df: int
    alpha: float
    critical_value: float

    @property
    def significant(self) -> bool:
        return self.t > self.critical_value


def paired_t_test(differences, alpha: float = 0.10) -> TTestResult:
    """t statistic of paired differences against a zero mean.

    ``t = mean(E) / (sample_std(E) / sqrt(len(E)))``, compared to the
    one-tailed critical value of the t distribution with ``len(E) - 1``
    degrees of freedom.
    """
    E = np.asarray(differences, dtype=float)
    if len(E) < 2:
        raise DataError(f"paired t-test needs at least 2 differences, got {len(E)}")
    std = E.std(ddof=1)
    if std == 0.0:
        raise DataError("paired t-test is undefined for zero-variance differences")
    t = float(E.mean() / (std / np.sqrt(len(E))))
    df = len(E) - 1
    return TTestResult(
        differences=[float(e) for e in E],
        t=t,
        df=df,
        alpha=alpha,
        critical_value=float(student_t_quantile(1.0 - alpha, df)),
    )


@dataclass
class CycleHypothesisMatrix:
    """t-scores for appropriate-vs-alternative cycle training.

    ``t[i][j]`` tests whether classifiers trained on cycle i beat those
    trained on cycle j when both are evaluated on the target country's
    cycle-i data. The diagonal is undefined (NaN).
    """

    t: np.ndarray
    significant: np.ndarray
    alpha: float
    critical_value: float
    results: dict[tuple[str, str], TTestResult]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["appropriate"] + [f"alt_{c}" for c in CYCLES] + ["test_set"])
            for i, cycle in enumerate(CYCLES):
                cells = []
                for j in range(len(CYCLES)):
                    if i == j:
                        cells.append("")
                    else:
                        mark = "*" if self.significant[i, j] else ""
                        cells.append(f"{self.t[i, j]:.4f}{mark}")
                writer.writerow([cycle] + cells + [f"target_{cycle}"])


def cycle_hypothesis_matrix(
    hit_matrices: dict[str, np.ndarray], alpha: float = 0.10
) -> CycleHypothesisMatrix:
    """Paired one-tailed t-tests across countries for every cycle pair.

    ``hit_matrices[country][i][j]`` is the hit rate of the classifier
    trained on that country's cycle i, tested on the target country's
    cycle j. Countries enter each difference vector in sorted name
    order.
    """
    countries = sorted(hit_matrices)
    if not countries:
        raise DataError("no country hit matrices supplied")
    matrices = {}
    for country in countries:
        m = np.asarray(hit_matrices[country], dtype=float)
        if m.shape != (3, 3):
            raise DataError(f"{country}: hit matrix must be 3x3, got {m.shape}")
        matrices[country] = m

    t = np.full((3, 3), np.nan)
    significant = np.zeros((3, 3), dtype=bool)
    results: dict[tuple[str, str], TTestResult] = {}
    critical = float(student_t_quantile(1.0 - alpha, len(countries) - 1))
    for i in range(3):
        for j in range(3):
            if i == j:
                continue
            E = [matrices[c][i, i] - matrices[c][j, i] for c in countries]
            try:
                res = paired_t_test(E, alpha=alpha)
            except DataError as exc:
                raise DataError(
                    f"cell (appropriate {CYCLES[i]}, alternative {CYCLES[j]}): {exc}"
                ) from None
            t[i, j] = res.t
            significant[i, j] = res.significant
            results[(CYCLES[i], CYCLES[j])] = res
    return CycleHypothesisMatrix(
        t=t, significant=significant, alpha=alpha, critical_value=critical, results=results
    )


def pearson(x, y) -> float:
    """Sample Pearson correlation coefficient."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y):
        raise DataError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise DataError("pearson needs at least 2 points")
    xd = x - x.mean()
    yd = y - y.mean()
    sx = np.sqrt((xd * xd).sum())
    sy = np.sqrt((yd * yd).sum())
    if sx == 0.0 or sy == 0.0:
        raise DataError("pearson is undefined for constant input")
    return float(np.clip((xd * yd).sum() / (sx * sy), -1.0, 1.0))


@dataclass
class CorrelationReport:
    """Per-indicator linear and general-dependence screens of L vs C."""

    codes: list[str]
    pcc: dict[str, float]
    mic: dict[str, float]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([""] + self.codes)
            writer.writerow(["PCC"] + [f"{self.pcc[c]:.4f}" for c in self.codes])
            writer.writerow(["MIC"] + [f"{self.mic[c]:.4f}" for c in self.codes])


def correlation_report(pairs: dict[str, tuple[np.ndarray, np.ndarray]]) -> CorrelationReport:
    """PCC and MIC between the level and change feature of each code.

    ``pairs`` maps indicator code to aligned (level, change) series;
    insertion order fixes the export column order.
    """
    codes = list(pairs)
    pcc_map: dict[str, float] = {}
    mic_map: dict[str, float] = {}
    for code, (level, change) in pairs.items():
        level = np.asarray(level, dtype=float)
        change = np.asarray(change, dtype=float)
        if len(level) != len(change):
            raise DataError(f"{code}: level/change series misaligned")
        pcc_map[code] = pearson(level, change)
        mic_map[code] = mic(level, change)
    return CorrelationReport(codes=codes, pcc=pcc_map, mic=mic_map)


def importance_heatmap(
    models: dict[tuple[str, str], TrainedModel],
) -> dict[str, dict[str, dict[str, float]]]:
    """Per-cycle importance tables: cycle -> country -> feature -> weight.

    Every row is a normalized importance vector (sums to 1).
    """
    table: dict[str, dict[str, dict[str, float]]] = {}
    for (country, cycle), model in sorted(models.items()):
        table.setdefault(cycle, {})[country] = feature_importance(model)
    return table


def heatmap_to_csv(table: dict[str, dict[str, dict[str, float]]], directory: str | Path) -> list[Path]:
    """One Appendix-style CSV per cycle: countries as rows, features as columns."""
    directory = Path(directory)
    written = []
    for cycle in sorted(table):
        rows = table[cycle]
        features = list(next(iter(rows.values())))
        path = directory / f"importance_{cycle}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["country"] + features)
            for country in sorted(rows):
                writer.writerow([country] + [f"{rows[country][f]:.6f}" for f in features])
        written.append(path)
    return written
