"""Loading, validation and assembly of the monthly indicator panel.

Input files are one CSV per (country, indicator code) with header
``month,value``, months as ``YYYY-MM``. The 8 transformable codes each
contribute a level and a change feature; the calendar month (code O1)
is carried through untransformed, giving the 17-column panel.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .asg import AsgParams, asg_transform
from .errors import DataError
from .months import format_month, month_of_year, parse_month
from .validation import check_feature_matrix, check_labels

ASG_CODES = ("FF1", "GM1", "GM2", "I1", "I2", "MP1", "MP2", "MP4")
INDICATOR_CODES = ASG_CODES + ("O1",)
MONTH_FEATURE = "Month"

FEATURE_PRESETS = {
    "full": [f"{c}_{s}" for c in ASG_CODES for s in ("L", "C")] + [MONTH_FEATURE],
    "feature_extraction": ["MP4_C", "MP4_L", "MP1_C", "I2_L", "MP1_L", "I2_C", "FF1_L"],
    "excl_mp4": [f"{c}_{s}" for c in ASG_CODES if c != "MP4" for s in ("L", "C")]
    + [MONTH_FEATURE],
    "base": ["MP4_L", "MP4_C"],
}


def codes_for_preset(preset: str) -> tuple[str, ...]:
    """Indicator codes whose files a preset needs (MP4 always, for labels)."""
    if preset not in FEATURE_PRESETS:
        raise DataError(f"unknown feature preset {preset!r}")
    codes = {name.rsplit("_", 1)[0] for name in FEATURE_PRESETS[preset] if name != MONTH_FEATURE}
    codes.add("MP4")
    return tuple(c for c in ASG_CODES if c in codes)


@dataclass(frozen=True)
class IndicatorSeries:
    """One country's monthly values for one indicator code."""

    country: str
    code: str
    months: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        months = np.asarray(self.months, dtype=int)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "months", months)
        object.__setattr__(self, "values", values)
        if len(months) != len(values):
            raise DataError(f"{self.country}/{self.code}: months/values length mismatch")
        if len(months) > 1:
            steps = np.diff(months)
            if (steps <= 0).any():
                raise DataError(f"{self.country}/{self.code}: months not strictly increasing")
            if (steps != 1).any():
                gap = months[int(np.flatnonzero(steps != 1)[0])] + 1
                raise DataError(
                    f"{self.country}/{self.code}: missing month {format_month(gap)}"
                )
        if len(values) and not np.all(np.isfinite(values)):
            bad = months[int(np.flatnonzero(~np.isfinite(values))[0])]
            raise DataError(
                f"{self.country}/{self.code}: non-finite value at {format_month(bad)}"
            )

    def clip(self, start: int, end: int) -> "IndicatorSeries":
        mask = (self.months >= start) & (self.months <= end)
        return IndicatorSeries(self.country, self.code, self.months[mask], self.values[mask])


@dataclass(frozen=True)
class LabelSeries:
    """Direction labels: +1/-1 per month, zero-change months absent."""

    country: str
    months: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "months", np.asarray(self.months, dtype=int))
        object.__setattr__(self, "labels", check_labels(self.labels))
        if len(self.months) != len(self.labels):
            raise DataError(f"{self.country}: label months/values length mismatch")

    def restrict(self, months: np.ndarray) -> "LabelSeries":
        mask = np.isin(self.months, months)
        return LabelSeries(self.country, self.months[mask], self.labels[mask])


@dataclass
class AlignedPanel:
    """Feature matrix on a common month index for one country."""

    country: str
    months: np.ndarray
    feature_names: list[str]
    matrix: np.ndarray

    def __post_init__(self):
        self.months = np.asarray(self.months, dtype=int)
        self.matrix = check_feature_matrix(self.matrix, n_features=len(self.feature_names))
        if self.matrix.shape[0] != len(self.months):
            raise DataError(f"{self.country}: panel matrix/month index mismatch")


@dataclass
class Dataset:
    """Feature rows with direction labels and provenance."""

    months: np.ndarray
    X: np.ndarray
    y: np.ndarray
    feature_names: list[str]
    country: str
    cycle: str

    def __post_init__(self):
        self.months = np.asarray(self.months, dtype=int)
        self.X = check_feature_matrix(self.X, n_features=len(self.feature_names))
        self.y = check_labels(self.y)
        if not (len(self.months) == self.X.shape[0] == len(self.y)):
            raise DataError(f"{self.country}/{self.cycle}: dataset row misalignment")
        if len(self.months) == 0:
            raise DataError(f"{self.country}/{self.cycle}: empty dataset")
        if len(self.months) > 1 and (np.diff(self.months) <= 0).any():
            raise DataError(f"{self.country}/{self.cycle}: months not strictly increasing")

    def __len__(self) -> int:
        return len(self.y)

    def to_json(self) -> str:
        return json.dumps(
            {
                "country": self.country,
                "cycle": self.cycle,
                "feature_names": self.feature_names,
                "months": [format_month(m) for m in self.months],
                "X": self.X.tolist(),
                "y": self.y.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "Dataset":
        raw = json.loads(text)
        return cls(
            months=np.array([parse_month(m) for m in raw["months"]], dtype=int),
            X=np.asarray(raw["X"], dtype=float),
            y=np.asarray(raw["y"], dtype=int),
            feature_names=list(raw["feature_names"]),
            country=raw["country"],
            cycle=raw["cycle"],
        )


def load_indicator_csv(path: str | Path, country: str, code: str) -> IndicatorSeries:
    """Read and validate one ``month,value`` indicator file.

    Errors carry the offending row number: parse failures, duplicate
    months, gaps and non-finite values are all rejected.
    """
    path = Path(path)
    if code not in INDICATOR_CODES:
        raise DataError(f"unknown indicator code {code!r}")
    if not path.exists():
        raise DataError(f"missing data file {path}")
    rows: list[tuple[int, float, int]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["month", "value"]:
            raise DataError(f"{path}: expected header 'month,value', got {header}")
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise DataError(f"{path}:{row_no}: expected 2 columns, got {len(row)}")
            try:
                month = parse_month(row[0])
            except DataError as exc:
                raise DataError(f"{path}:{row_no}: {exc}") from None
            try:
                value = float(row[1])
            except ValueError:
                raise DataError(f"{path}:{row_no}: value {row[1]!r} is not a number") from None
            if not np.isfinite(value):
                raise DataError(f"{path}:{row_no}: non-finite value {row[1]!r}")
            rows.append((month, value, row_no))
    if not rows:
        raise DataError(f"{path}: no data rows")
    rows.sort(key=lambda r: r[0])
    for (m1, _, _), (m2, _, r2) in zip(rows, rows[1:]):
        if m2 == m1:
            raise DataError(f"{path}:{r2}: duplicate month {format_month(m2)}")
        if m2 != m1 + 1:
            raise DataError(
                f"{path}:{r2}: gap in months, missing {format_month(m1 + 1)}"
            )
    return IndicatorSeries(
        country=country,
        code=code,
        months=np.array([r[0] for r in rows], dtype=int),
        values=np.array([r[1] for r in rows], dtype=float),
    )


def build_labels(yield_series: IndicatorSeries) -> LabelSeries:
    """Direction of the next month's yield move.

    The label at month t is the sign of ``y[t+1] - y[t]``; flat months
    are omitted, as is the final month (no successor).
    """
    if len(yield_series.months) < 2:
        raise DataError(
            f"{yield_series.country}/{yield_series.code}: need at least 2 months for labels"
        )
    changes = np.diff(yield_series.values)
    keep = changes != 0.0
    return LabelSeries(
        country=yield_series.country,
        months=yield_series.months[:-1][keep],
        labels=np.sign(changes[keep]).astype(int),
    )


def build_panel(
    series_by_code: dict[str, IndicatorSeries],
    params: AsgParams | None = None,
    preset: str = "full",
) -> AlignedPanel:
    """Transform the per-code series and align the selected features.

    The month index of the panel is the intersection of the months on
    which every selected feature is defined. The calendar-month feature
    is derived directly from the index; no O1 file is needed.
    """
    params = params or AsgParams()
    feature_names = FEATURE_PRESETS.get(preset)
    if feature_names is None:
        raise DataError(f"unknown feature preset {preset!r}")
    needed = codes_for_preset(preset)
    country = next(iter(series_by_code.values())).country if series_by_code else "?"

    columns: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    common: np.ndarray | None = None
    for code in needed:
        series = series_by_code.get(code)
        if series is None:
            raise DataError(f"{country}: missing indicator series {code}")
        pair = asg_transform(series, params)
        for suffix, trace in (("L", pair.level), ("C", pair.change)):
            name = f"{code}_{suffix}"
            if name in feature_names:
                columns[name] = (trace.months, trace.final)
                common = trace.months if common is None else np.intersect1d(common, trace.months)
    if common is None or len(common) == 0:
        raise DataError(f"{country}: no common months across features")

    matrix = np.empty((len(common), len(feature_names)))
    for j, name in enumerate(feature_names):
        if name == MONTH_FEATURE:
            matrix[:, j] = [month_of_year(m) for m in common]
        else:
            months, values = columns[name]
            idx = np.searchsorted(months, common)
            matrix[:, j] = values[idx]
    return AlignedPanel(
        country=country, months=common, feature_names=feature_names.copy(), matrix=matrix
    )


@dataclass
class AssemblyDiagnostics:
    """Bookkeeping from routing labeled months into cycle datasets."""

    country: str
    n_labels: int
    counts: dict[str, int] = field(default_factory=dict)
    dropped_unlabeled: int = 0
    empty_cycles: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "country": self.country,
            "n_labels": self.n_labels,
            "counts": dict(self.counts),
            "dropped_unlabeled": self.dropped_unlabeled,
            "empty_cycles": list(self.empty_cycles),
        }


def assemble_datasets(panel, labels, partition) -> tuple[dict[str, Dataset], AssemblyDiagnostics]:
    """Route each labeled month into its mentality-cycle dataset.

    Months without a cycle label are dropped (counted in diagnostics);
    cycles that end up empty are reported so downstream training can
    skip them. Label months must all be present in the panel.
    """
    from .cycles import CYCLE_LABELS

    missing = np.setdiff1d(labels.months, panel.months)
    if len(missing):
        raise DataError(
            f"{panel.country}: label month {format_month(int(missing[0]))} not in panel"
        )
    month_to_row = {int(m): i for i, m in enumerate(panel.months)}
    buckets: dict[str, list[int]] = {c: [] for c in CYCLE_LABELS}
    dropped = 0
    label_rows: dict[str, list[int]] = {c: [] for c in CYCLE_LABELS}
    for i, month in enumerate(labels.months):
        cycle = partition.label_of(int(month))
        if cycle is None:
            dropped += 1
            continue
        buckets[cycle].append(month_to_row[int(month)])
        label_rows[cycle].append(i)

    diagnostics = AssemblyDiagnostics(
        country=panel.country, n_labels=len(labels.months), dropped_unlabeled=dropped
    )
    datasets: dict[str, Dataset] = {}
    for cycle in CYCLE_LABELS:
        rows = buckets[cycle]
        diagnostics.counts[cycle] = len(rows)
        if not rows:
            diagnostics.empty_cycles.append(cycle)
            continue
        datasets[cycle] = Dataset(
            months=panel.months[rows],
            X=panel.matrix[rows],
            y=labels.labels[label_rows[cycle]],
            feature_names=panel.feature_names.copy(),
            country=panel.country,
            cycle=cycle,
        )
    return datasets, diagnostics
