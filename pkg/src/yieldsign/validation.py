"""Input validation helpers shared by the estimator-facing modules."""

from __future__ import annotations

import numpy as np

from .errors import DataError


def as_float_array(values, name: str = "series") -> np.ndarray:
    """Coerce to a 1-D float64 array, rejecting non-finite entries."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise DataError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise DataError(f"{name} contains a non-finite value at position {bad}")
    return arr


def check_feature_matrix(X, n_features: int | None = None) -> np.ndarray:
    """Coerce to a finite 2-D float64 matrix, optionally checking width."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise DataError(f"feature matrix must be 2-dimensional, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise DataError("feature matrix contains non-finite values")
    if n_features is not None and X.shape[1] != n_features:
        raise DataError(
            f"feature dimension mismatch: expected {n_features}, got {X.shape[1]}"
        )
    return X


def check_labels(y) -> np.ndarray:
    """Coerce direction labels to an int array of +1/-1 values."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise DataError(f"labels must be 1-dimensional, got shape {y.shape}")
    out = y.astype(int)
    if y.size and not np.all(np.isin(out, (-1, 1))):
        raise DataError("labels must be +1 or -1")
    return out
