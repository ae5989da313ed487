"""Maximal information coefficient.

Implements the grid-search estimator: over all a-by-b grids with
``a * b <= n^alpha``, take the largest normalized mutual information
``I(X_grid; Y_grid) / log2(min(a, b))``. The search uses the standard
approximation - equipartition one axis, then find the optimal partition
of the other axis by dynamic programming over "clumps" (maximal runs of
x-consecutive points sharing a row), with the clump count limited to
``clump_factor * a`` superclumps. Both axis orientations are searched
and the maximum taken, so the estimate is symmetric in its arguments by
construction.

Only the rank order of each variable enters the computation, so the
result is invariant under strictly monotone transforms.
"""

from __future__ import annotations

import numpy as np

from .errors import DataError
from .validation import as_float_array

MIN_POINTS = 25


def _equipartition(sorted_group_sizes: np.ndarray, n_bins: int) -> np.ndarray:
    """Greedy balanced grouping of ordered tie-groups into at most n_bins.

    ``sorted_group_sizes[i]`` is the size of the i-th tie-group in axis
    order; tied points always land in the same bin. Returns the bin
    index per group.
    """
    n = int(sorted_group_sizes.sum())
    n_groups = len(sorted_group_sizes)
    assignment = np.empty(n_groups, dtype=int)
    current = 0
    placed = 0
    current_size = 0
    target = n / n_bins
    for g in range(n_groups):
        size = int(sorted_group_sizes[g])
        if current_size > 0 and abs(current_size + size - target) >= abs(current_size - target):
            if current < n_bins - 1:
                current += 1
                current_size = 0
                target = (n - placed) / (n_bins - current)
        assignment[g] = current
        current_size += size
        placed += size
    return assignment


def _row_assignment(y: np.ndarray, n_rows: int) -> np.ndarray:
    """Equipartition the y axis; returns a row index per point."""
    order = np.argsort(y, kind="stable")
    y_sorted = y[order]
    # Tie-group boundaries in sorted order.
    new_group = np.empty(len(y), dtype=bool)
    new_group[0] = True
    new_group[1:] = y_sorted[1:] != y_sorted[:-1]
    group_ids = np.cumsum(new_group) - 1
    sizes = np.bincount(group_ids)
    bins = _equipartition(sizes, n_rows)
    rows = np.empty(len(y), dtype=int)
    rows[order] = bins[group_ids]
    return rows


def _clump_matrix(x: np.ndarray, rows: np.ndarray, n_rows: int) -> np.ndarray:
    """Per-clump row counts, clumps ordered by x.

    A clump is a maximal run of x-consecutive points in one row; points
    with identical x always share a clump (a same-x run spanning several
    rows becomes its own clump).
    """
    order = np.argsort(x, kind="stable")
    xo = x[order]
    ro = rows[order].copy()
    n = len(x)
    # Same-x runs spanning multiple rows get a fresh pseudo-row id so the
    # run stays together in one clump.
    i = 0
    pseudo = n_rows
    while i < n:
        j = i
        while j < n and xo[j] == xo[i]:
            j += 1
        if j - i > 1 and len(np.unique(ro[i:j])) > 1:
            marker = pseudo
            pseudo += 1
            ro[i:j] = marker
        i = j
    boundaries = np.empty(n, dtype=bool)
    boundaries[0] = True
    boundaries[1:] = ro[1:] != ro[:-1]
    clump_ids = np.cumsum(boundaries) - 1
    n_clumps = int(clump_ids[-1]) + 1
    counts = np.zeros((n_clumps, n_rows), dtype=np.int64)
    np.add.at(counts, (clump_ids, rows[order]), 1)
    return counts


def _superclumps(counts: np.ndarray, max_clumps: int) -> np.ndarray:
    if len(counts) <= max_clumps:
        return counts
    sizes = counts.sum(axis=1)
    bins = _equipartition(sizes, max_clumps)
    merged = np.zeros((bins[-1] + 1, counts.shape[1]), dtype=np.int64)
    np.add.at(merged, bins, counts)
    return merged


def _entropy_terms(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    mask = p > 0
    out[mask] = p[mask] * np.log2(p[mask])
    return out


def _optimize_columns(counts: np.ndarray, max_cols: int, n: int) -> np.ndarray:
    """Best achievable MI for every column budget 2..max_cols.

    ``counts`` holds per-clump row counts in x order. Column partitions
    may only cut between clumps. MI decomposes as H(Q) plus a sum of
    per-column terms, so a prefix dynamic program over clump boundaries
    finds the optimum.
    """
    k = len(counts)
    cum = np.vstack([np.zeros(counts.shape[1], dtype=np.int64), np.cumsum(counts, axis=0)])
    totals = cum[-1].astype(float) / n
    h_q = -float(_entropy_terms(totals).sum())

    def gain(s_idx: np.ndarray, t: int) -> np.ndarray:
        # Column contribution for clumps (s, t]: -p log p + sum_r p_r log p_r.
        cell = (cum[t] - cum[s_idx]).astype(float) / n
        col_p = cell.sum(axis=1)
        return -_entropy_terms(col_p) + _entropy_terms(cell).sum(axis=1)

    max_l = min(max_cols, k)
    # f[t, l] = best sum of column gains splitting the first t clumps into l columns.
    f = np.full((k + 1, max_l + 1), -np.inf)
    all_t = np.arange(k + 1)
    prefixes = cum[1:].astype(float) / n
    f[1:, 1] = -_entropy_terms(prefixes.sum(axis=1)) + _entropy_terms(prefixes).sum(axis=1)
    for l in range(2, max_l + 1):
        for t in range(l, k + 1):
            s = all_t[l - 1 : t]
            f[t, l] = np.max(f[s, l - 1] + gain(s, t))

    best = np.empty(max_cols - 1)
    running = -np.inf
    for a in range(2, max_cols + 1):
        l_cap = min(a, max_l)
        running = max(running, float(np.max(f[k, 1 : l_cap + 1])))
        best[a - 2] = h_q + running
    return best


def mic(x, y, alpha_exp: float = 0.6, clump_factor: float = 15.0) -> float:
    """Maximal information coefficient of two samples.

    Grid budget is ``n ** alpha_exp``; ``clump_factor`` bounds the
    number of candidate cut positions per column count. Constant input
    returns 0 by convention.
    """
    x = as_float_array(x, "x")
    y = as_float_array(y, "y")
    if len(x) != len(y):
        raise DataError(f"length mismatch: {len(x)} vs {len(y)}")
    n = len(x)
    if n < MIN_POINTS:
        raise DataError(f"mic needs at least {MIN_POINTS} points, got {n}")
    if np.all(x == x[0]) or np.all(y == y[0]):
        return 0.0

    budget = max(float(n) ** alpha_exp, 4.0)
    best = 0.0
    for b in range(2, int(budget // 2) + 1):
        a_max = int(budget / b)
        if a_max < 2:
            break
        for u, v in ((x, y), (y, x)):
            rows = _row_assignment(v, b)
            n_rows = int(rows.max()) + 1
            counts = _clump_matrix(u, rows, n_rows)
            counts = _superclumps(counts, max(1, int(clump_factor * a_max)))
            mi = _optimize_columns(counts, a_max, n)
            for a in range(2, a_max + 1):
                val = mi[a - 2] / np.log2(min(a, b))
                if val > best:
                    best = float(val)
    return min(best, 1.0)
