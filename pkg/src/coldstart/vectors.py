"""Deterministic vector primitives shared by every detector.

All arithmetic runs in float64; list inputs are widened on entry. Each
function is pure, so concurrent callers never contend. Distance blocks
are row-chunked to bound memory without changing the per-row summation
order (summation order is part of the reproducibility contract).
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

L2 = "l2"
COSINE = "cosine"
METRICS = (L2, COSINE)

# Peak float64 elements per pairwise block.
_BLOCK_ELEMS = 1 << 24


def as_vector(values) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {v.shape}")
    return v


def as_matrix(points, dim: int | None = None) -> np.ndarray:
    """Stack points into an (n, dim) float64 matrix; empty input needs dim."""
    if isinstance(points, np.ndarray) and points.ndim == 2:
        return points.astype(np.float64, copy=False)
    rows = list(points)
    if not rows:
        if dim is None:
            raise ValueError("cannot infer dimension of an empty point set")
        return np.empty((0, dim), dtype=np.float64)
    try:
        m = np.asarray(rows, dtype=np.float64)
    except ValueError as exc:
        raise ValueError(f"points have mixed dimensions: {exc}") from None
    if m.ndim != 2:
        raise ValueError(f"expected a sequence of vectors, got shape {m.shape}")
    return m


def _check_metric(metric: str) -> None:
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}, expected one of {METRICS}")


def pairwise_distances(xs, centers, metric: str = L2) -> np.ndarray:
    """(n, k) matrix of distances from each row of xs to each center."""
    _check_metric(metric)
    X = as_matrix(xs)
    C = as_matrix(centers)
    if X.shape[1] != C.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {C.shape[1]}")
    if C.shape[0] == 0:
        raise ValueError("no centers given")
    n, d = X.shape
    k = C.shape[0]
    if metric == COSINE:
        xn = np.sqrt((X * X).sum(axis=1))
        cn = np.sqrt((C * C).sum(axis=1))
        if (xn == 0.0).any() or (cn == 0.0).any():
            raise ValueError("cosine distance is undefined for zero vectors")
    out = np.empty((n, k), dtype=np.float64)
    rows = max(1, _BLOCK_ELEMS // max(1, k * d))
    for start in range(0, n, rows):
        stop = min(n, start + rows)
        block = X[start:stop, None, :]
        if metric == L2:
            out[start:stop] = np.sqrt(((block - C[None, :, :]) ** 2).sum(axis=2))
        else:
            dots = (block * C[None, :, :]).sum(axis=2)
            out[start:stop] = 1.0 - dots / (xn[start:stop, None] * cn[None, :])
    return out


def distance(a, b, metric: str = L2) -> float:
    """Distance between two vectors; L2 by default."""
    va = as_vector(a)
    vb = as_vector(b)
    return float(pairwise_distances(va[None, :], vb[None, :], metric)[0, 0])


def min_distances(xs, centers, metric: str = L2) -> np.ndarray:
    """Per-row minimum distance to any center."""
    return pairwise_distances(xs, centers, metric).min(axis=1)


def nearest_indices(xs, centers, metric: str = L2) -> tuple[np.ndarray, np.ndarray]:
    """Per-row argmin center index and its distance; ties go to the lowest index."""
    C = as_matrix(centers)
    X = as_matrix(xs, dim=C.shape[1])
    if X.shape[0] == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)
    dists = pairwise_distances(X, C, metric)
    idx = dists.argmin(axis=1)
    return idx.astype(np.int64), dists[np.arange(len(idx)), idx]


def nearest_index(x, centers, metric: str = L2) -> tuple[int, float]:
    """Index of the closest center and the distance to it."""
    idx, dist = nearest_indices(as_vector(x)[None, :], centers, metric)
    return int(idx[0]), float(dist[0])


def coordinate_median(points) -> np.ndarray:
    """Per-coordinate median of a nonempty point set.

    Even counts take the mean of the two middle values, so every output
    coordinate stays inside that coordinate's observed [min, max] range.
    """
    m = as_matrix(points)
    if m.shape[0] == 0:
        raise ValueError("median of an empty point set")
    return np.median(m, axis=0)


def percentile(values, p: float) -> float:
    """Nearest-rank percentile: sorted value at rank ceil((p/100)*n), 1-based.

    p must lie in (0, 100]; p=100 returns the maximum. The rank is derived in
    exact rational arithmetic because float rounding of (p/100)*n misranks
    boundary cases (e.g. p=90, n=10 would yield rank 10 instead of 9).
    """
    vals = np.asarray(values, dtype=np.float64).ravel()
    if vals.size == 0:
        raise ValueError("percentile of an empty sequence")
    if not 0.0 < p <= 100.0:
        raise ValueError(f"percentile must be in (0, 100], got {p}")
    n = vals.size
    rank = math.ceil(Fraction(p) * n / 100)
    rank = min(max(rank, 1), n)
    return float(np.sort(vals)[rank - 1])


def round_half_even(value: Fraction | float) -> int:
    """Banker's rounding on the exact rational value of the input."""
    return round(Fraction(value))
