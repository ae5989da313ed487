"""The ASG feature transform.

Turns one monthly indicator series into two bounded features, a *level*
feature and a *change* feature, via four stages:

1. rolling standardisation against the trailing window (the change
   pipeline first differences the series),
2. outlier replacement capping absolute values,
3. a shift making the series non-negative,
4. multiplication by the sign of the Savitzky-Golay-smoothed trend of
   the stage-1 series.

Stage 4 re-injects direction, so each feature ends up in
``[-2*cap, +2*cap]`` with a bimodal shape. Every intermediate stage is
retained in a :class:`StageTrace` for inspection and plotting.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import DataError
from .months import format_month
from .validation import as_float_array

TRACE_COLUMNS = ("month", "s1", "ex_out", "s2", "s3", "ds3", "final")


@dataclass(frozen=True)
class AsgParams:
    """Tuning knobs of the transform.

    window: trailing months used for standardisation (stage 1).
    cap: absolute-value ceiling applied by outlier replacement (stage 2.1).
    sg_window / sg_order: Savitzky-Golay window length (odd) and
    polynomial order. The defaults (3, 2) make the filter an exact
    interpolation, i.e. no smoothing.
    """

    window: int = 12
    cap: float = 3.0
    sg_window: int = 3
    sg_order: int = 2

    def __post_init__(self):
        if self.window < 2:
            raise ValueError(f"window must be >= 2, got {self.window}")
        if self.cap <= 0:
            raise ValueError(f"cap must be positive, got {self.cap}")
        if self.sg_window < 1 or self.sg_window % 2 == 0:
            raise ValueError(f"sg_window must be odd and positive, got {self.sg_window}")
        if not 0 <= self.sg_order < self.sg_window:
            raise ValueError(
                f"sg_order must satisfy 0 <= order < window, got {self.sg_order}"
            )


@dataclass
class StageTrace:
    """All intermediate series of one pipeline, aligned to one month index."""

    months: np.ndarray
    s1: np.ndarray
    ex_out: np.ndarray
    s2: np.ndarray
    s3: np.ndarray
    ds3: np.ndarray
    final: np.ndarray
    m_used: int

    def __post_init__(self):
        n = len(self.months)
        for name in ("s1", "ex_out", "s2", "s3", "ds3", "final"):
            if len(getattr(self, name)) != n:
                raise DataError(f"stage trace series {name} misaligned with months")

    def to_csv(self, path: str | Path) -> None:
        """Write the trace with the documented column layout."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_COLUMNS)
            for i, m in enumerate(self.months):
                writer.writerow(
                    [
                        format_month(m),
                        repr(float(self.s1[i])),
                        repr(float(self.ex_out[i])),
                        repr(float(self.s2[i])),
                        repr(float(self.s3[i])),
                        int(self.ds3[i]),
                        repr(float(self.final[i])),
                    ]
                )


@dataclass
class AsgFeaturePair:
    """Level and change pipelines of one indicator."""

    code: str
    level: StageTrace
    change: StageTrace


def rolling_standardize(
    values, window: int, mode: str = "level", months=None
) -> tuple[np.ndarray, int]:
    """Standardise each point against the trailing ``window`` points.

    In ``level`` mode the output at position t is
    ``(x[t] - mean(x[t-window:t])) / sample_std(x[t-window:t])``; in
    ``change`` mode the series is first differenced and the same formula
    applied to the differences. Points without a full trailing window
    are absent from the output.

    Returns ``(out, start)`` where ``start`` is the index into the input
    of the first output point.
    """
    x = as_float_array(values)
    if mode not in ("level", "change"):
        raise ValueError(f"mode must be 'level' or 'change', got {mode!r}")
    if window < 2:
        raise ValueError(f"window must be >= 2, got {window}")
    offset = 0
    if mode == "change":
        if len(x) < window + 2:
            raise DataError(
                f"change mode needs at least {window + 2} points, got {len(x)}"
            )
        x = np.diff(x)
        offset = 1
    elif len(x) < window + 1:
        raise DataError(f"level mode needs at least {window + 1} points, got {len(x)}")

    # Trailing window for the output at t = window + i is x[i : i + window].
    trailing = np.lib.stride_tricks.sliding_window_view(x, window)[:-1]
    means = trailing.mean(axis=1)
    stds = trailing.std(axis=1, ddof=1)
    if (stds == 0.0).any():
        pos = offset + window + int(np.flatnonzero(stds == 0.0)[0])
        where = format_month(months[pos]) if months is not None else f"position {pos}"
        raise DataError(f"constant trailing window before {where}: zero std")
    return (x[window:] - means) / stds, offset + window


def replace_outliers(values, cap: float) -> tuple[np.ndarray, int]:
    """Clamp every value with ``|v| > cap`` to the largest surviving magnitude.

    The replacement value is ``sign(v) * v*`` where ``v*`` is the
    largest absolute value among elements already within the cap, so the
    result never exceeds the cap. Returns the clamped series and the
    number of replacements.
    """
    x = as_float_array(values)
    if x.size == 0:
        raise DataError("cannot replace outliers in an empty series")
    if cap <= 0:
        raise ValueError(f"cap must be positive, got {cap}")
    inside = np.abs(x) <= cap
    if not inside.any():
        raise DataError(f"every value exceeds the cap {cap} in absolute value")
    v_star = np.abs(x[inside]).max()
    out = x.copy()
    outliers = ~inside
    out[outliers] = np.sign(x[outliers]) * v_star
    return out, int(outliers.sum())


def shift_nonnegative(values) -> tuple[np.ndarray, float]:
    """Subtract the minimum so the smallest value maps to exactly 0."""
    x = as_float_array(values)
    if x.size == 0:
        raise DataError("cannot shift an empty series")
    shift = float(x.min())
    return x - shift, shift


def _savgol_coefficients(window: int, order: int) -> np.ndarray:
    # Least-squares fit of a degree-`order` polynomial over centred
    # offsets, evaluated at the centre: the constant coefficient row of
    # the pseudo-inverse of the Vandermonde design.
    half = window // 2
    design = np.vander(np.arange(-half, half + 1, dtype=float), order + 1, increasing=True)
    return np.linalg.pinv(design)[0]


def savgol_filter(values, sg_window: int, sg_order: int) -> np.ndarray:
    """Savitzky-Golay smoothing, output length equal to input length.

    Interior points use the centred least-squares polynomial fit.
    Points too close to either end are taken from the polynomial fitted
    over the first (resp. last) full window, so polynomials of degree
    <= sg_order are reproduced exactly everywhere.
    """
    x = as_float_array(values)
    if sg_window < 1 or sg_window % 2 == 0:
        raise ValueError(f"sg_window must be odd and positive, got {sg_window}")
    if not 0 <= sg_order < sg_window:
        raise ValueError(f"sg_order must satisfy 0 <= order < window, got {sg_order}")
    if len(x) < sg_window:
        raise DataError(f"series of length {len(x)} shorter than window {sg_window}")

    half = sg_window // 2
    coeffs = _savgol_coefficients(sg_window, sg_order)
    windows = np.lib.stride_tricks.sliding_window_view(x, sg_window)
    out = np.empty_like(x)
    out[half : len(x) - half] = windows @ coeffs

    if half:
        offsets = np.arange(-half, half + 1, dtype=float)
        design = np.vander(offsets, sg_order + 1, increasing=True)
        # Edge values from the polynomial fitted to the terminal windows.
        beta = np.linalg.lstsq(design, x[:sg_window], rcond=None)[0]
        out[:half] = np.vander(offsets[:half], sg_order + 1, increasing=True) @ beta
        beta = np.linalg.lstsq(design, x[-sg_window:], rcond=None)[0]
        out[len(x) - half :] = (
            np.vander(offsets[half + 1 :], sg_order + 1, increasing=True) @ beta
        )
    return out


def savgol_sign_change(filtered) -> np.ndarray:
    """Sign of the month-on-month change of a smoothed series.

    +1 when the series rose, -1 when it fell. A flat step carries the
    previous sign forward; a flat first step resolves to +1. The first
    point has no predecessor and is absent, so the output is one shorter
    than the input.
    """
    s = as_float_array(filtered)
    if len(s) < 2:
        raise DataError("need at least 2 points to compute a sign change")
    diffs = np.diff(s)
    out = np.empty(len(diffs), dtype=np.int8)
    prev = 1
    for i, d in enumerate(diffs):
        if d > 0:
            prev = 1
        elif d < 0:
            prev = -1
        out[i] = prev
    return out


def _run_pipeline(values, months, mode: str, params: AsgParams) -> StageTrace:
    s1_full, start = rolling_standardize(values, params.window, mode, months=months)
    if len(s1_full) < max(params.sg_window, 2):
        raise DataError(
            f"{mode} pipeline: {len(s1_full)} standardised points are too few "
            f"for sg_window={params.sg_window}"
        )
    s3_full = savgol_filter(s1_full, params.sg_window, params.sg_order)
    ds3 = savgol_sign_change(s3_full)

    # The final feature exists only from the second standardised month on
    # (the trend sign needs a predecessor). Outlier and shift statistics
    # are taken over that same index, so min(s2) is exactly 0 on the trace.
    s1 = s1_full[1:]
    s3 = s3_full[1:]
    ex_out, m_used = replace_outliers(s1, params.cap)
    s2, _ = shift_nonnegative(ex_out)
    final = s2 * ds3
    trace_months = months[start + 1 : start + 1 + len(s1)]
    return StageTrace(
        months=np.asarray(trace_months),
        s1=s1,
        ex_out=ex_out,
        s2=s2,
        s3=s3,
        ds3=ds3,
        final=final,
        m_used=m_used,
    )


def asg_transform(series, params: AsgParams | None = None) -> AsgFeaturePair:
    """Run both pipelines over one indicator series.

    ``series`` is an :class:`~yieldsign.ingest.IndicatorSeries` (or any
    object with ``code``, ``months`` and ``values`` attributes). The two
    traces are each aligned to their own month index; the change trace
    starts one month after the level trace because differencing consumes
    a point.
    """
    params = params or AsgParams()
    months = np.asarray(series.months)
    values = as_float_array(series.values, name=f"{series.code} values")
    min_len = params.window + 2 + max(params.sg_window, 2)
    if len(values) < min_len:
        raise DataError(
            f"{series.code}: series of length {len(values)} too short for "
            f"window={params.window}, sg_window={params.sg_window} "
            f"(need >= {min_len})"
        )
    return AsgFeaturePair(
        code=series.code,
        level=_run_pipeline(values, months, "level", params),
        change=_run_pipeline(values, months, "change", params),
    )


class AsgTransformer(BaseEstimator, TransformerMixin):
    """Estimator-style wrapper around :func:`asg_transform`.

    Stateless: ``fit`` only validates parameters. ``transform`` maps a
    1-D array of n values to an ``(n_out, 2)`` array holding the level
    and change features on their common trailing months
    (``n_out = n - window - 2``).
    """

    def __init__(self, window: int = 12, cap: float = 3.0, sg_window: int = 3, sg_order: int = 2):
        self.window = window
        self.cap = cap
        self.sg_window = sg_window
        self.sg_order = sg_order

    def _params(self) -> AsgParams:
        return AsgParams(
            window=self.window,
            cap=self.cap,
            sg_window=self.sg_window,
            sg_order=self.sg_order,
        )

    def fit(self, X, y=None):
        self._params()
        return self

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 2 and X.shape[1] == 1:
            X = X[:, 0]
        pair = self.transform_series(_AnonymousSeries(X))
        level, change = align_feature_pair(pair)
        return np.column_stack([level, change])

    def transform_series(self, series) -> AsgFeaturePair:
        return asg_transform(series, self._params())


@dataclass
class _AnonymousSeries:
    values: np.ndarray
    code: str = "X"
    months: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.months is None:
            self.months = np.arange(len(self.values))


def align_feature_pair(pair: AsgFeaturePair) -> tuple[np.ndarray, np.ndarray]:
    """Final level/change series restricted to their common months."""
    lead = len(pair.level.months) - len(pair.change.months)
    if lead < 0 or not np.array_equal(pair.level.months[lead:], pair.change.months):
        raise DataError(f"{pair.code}: level and change traces do not align")
    return pair.level.final[lead:], pair.change.final
