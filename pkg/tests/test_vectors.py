import math

import numpy as np
import pytest

from coldstart import vectors
from coldstart.vectors import (COSINE, L2, coordinate_median, distance,
                               min_distances, nearest_index, nearest_indices,
                               pairwise_distances, percentile, round_half_even)


# --- distance -------------------------------------------------------------

def test_l2_345_triangle():
    assert distance([0, 0], [3, 4]) == 5.0


def test_l2_identity():
    assert distance([1, 2, 3], [1, 2, 3]) == 0.0


def test_cosine_orthogonal():
    assert distance([1, 0], [0, 1], COSINE) == 1.0


def test_distance_symmetry_randomized():
    rng = np.random.default_rng(0)
    for _ in range(50):
        a = rng.normal(size=8)
        b = rng.normal(size=8)
        assert distance(a, b) == distance(b, a)
        assert distance(a, b, COSINE) == pytest.approx(distance(b, a, COSINE), abs=1e-15)


def test_l2_zero_iff_equal():
    rng = np.random.default_rng(1)
    for _ in range(20):
        a = rng.normal(size=5)
        assert distance(a, a) == 0.0
        b = a.copy()
        b[2] += 1e-9
        assert distance(a, b) > 0.0


def test_dimension_mismatch_errors():
    with pytest.raises(ValueError, match="dimension mismatch"):
        distance([1, 2], [1, 2, 3])


def test_cosine_zero_vector_errors():
    with pytest.raises(ValueError, match="zero vector"):
        distance([0, 0], [1, 1], COSINE)


def test_unknown_metric_errors():
    with pytest.raises(ValueError, match="unknown metric"):
        distance([1], [1], "manhattan")


def test_pairwise_chunking_consistent(monkeypatch):
    rng = np.random.default_rng(2)
    X = rng.normal(size=(37, 6))
    C = rng.normal(size=(11, 6))
    full = pairwise_distances(X, C)
    monkeypatch.setattr(vectors, "_BLOCK_ELEMS", 64)
    chunked = pairwise_distances(X, C)
    assert np.array_equal(full, chunked)


# --- coordinate_median ------------------------------------------------------

def test_median_odd_count():
    assert np.array_equal(coordinate_median([[0, 0], [1, 2], [2, 1]]), [1, 1])


def test_median_even_count_midpoint():
    assert np.array_equal(coordinate_median([[0, 0], [4, 4]]), [2, 2])


def test_median_outlier_robustness():
    # sorted coordinate list {0,0,0,100}: mean of 2nd and 3rd values = 0
    assert np.array_equal(coordinate_median([[0], [0], [0], [100]]), [0])


def test_median_empty_errors():
    with pytest.raises(ValueError, match="empty"):
        coordinate_median([])


def test_median_mixed_dims_errors():
    with pytest.raises(ValueError, match="mixed dimensions"):
        coordinate_median([[1, 2], [1, 2, 3]])


def test_median_order_invariant_and_bounded():
    rng = np.random.default_rng(3)
    for _ in range(30):
        pts = rng.normal(size=(rng.integers(1, 9), 4))
        med = coordinate_median(pts)
        shuffled = pts[rng.permutation(len(pts))]
        assert np.array_equal(coordinate_median(shuffled), med)
        assert (med >= pts.min(axis=0)).all()
        assert (med <= pts.max(axis=0)).all()


# --- percentile -------------------------------------------------------------

def test_percentile_nearest_rank_decile():
    assert percentile([1, 2, 3, 4, 5, 6, 7, 8, 9, 10], 90) == 9.0


def test_percentile_singleton():
    assert percentile([5], 50) == 5.0


def test_percentile_100_is_max():
    assert percentile([3, 1, 2], 100) == 3.0


def test_percentile_rank_is_exact_not_float_sloppy():
    # (90/100)*10 in float64 is 9.000000000000002; the rank must still be 9.
    assert percentile(list(range(1, 11)), 90.0) == 9.0
    # (66.7/100)*3 exceeds 2, so the nearest rank is 3 (the maximum).
    assert percentile([1.0, 2.0, 3.0], 66.7) == 3.0
    assert percentile([1.0, 2.0, 3.0], 66.0) == 2.0


def test_percentile_order_invariance():
    rng = np.random.default_rng(4)
    vals = rng.normal(size=25)
    for p in (10, 33.3, 50, 75, 99, 100):
        assert percentile(vals, p) == percentile(rng.permutation(vals), p)
        assert percentile(vals, 100) == vals.max()


def test_percentile_errors():
    with pytest.raises(ValueError, match="empty"):
        percentile([], 50)
    for bad in (0.0, -5, 100.1):
        with pytest.raises(ValueError, match="percentile"):
            percentile([1, 2], bad)


# --- nearest_index ----------------------------------------------------------

def test_nearest_basic():
    assert nearest_index([4, 0], [[0, 0], [10, 0]]) == (0, 4.0)


def test_nearest_tie_takes_lowest_index():
    assert nearest_index([5, 0], [[0, 0], [10, 0]]) == (0, 5.0)


def test_nearest_other_side():
    assert nearest_index([9, 0], [[0, 0], [10, 0]]) == (1, 1.0)


def test_nearest_empty_centers_errors():
    with pytest.raises(ValueError):
        nearest_index([1, 1], [])


def test_nearest_indices_batch_matches_scalar():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(20, 3))
    C = rng.normal(size=(6, 3))
    idx, dist = nearest_indices(X, C)
    for i in range(len(X)):
        j, d = nearest_index(X[i], C)
        assert idx[i] == j
        assert dist[i] == d
    assert np.array_equal(min_distances(X, C), dist)


def test_nearest_indices_empty_input():
    idx, dist = nearest_indices([], [[1.0, 2.0]])
    assert idx.shape == (0,) and dist.shape == (0,)


# --- rounding helper ---------------------------------------------------------

def test_round_half_even():
    assert round_half_even(2.5) == 2
    assert round_half_even(3.5) == 4
    assert round_half_even(2.4999) == 2
    assert round_half_even(-2.5) == -2


def test_l2_scale_equivariance():
    rng = np.random.default_rng(6)
    a = rng.normal(size=10)
    b = rng.normal(size=10)
    for lam in (0.5, 2.0, 37.25):
        assert distance(lam * a, lam * b) == pytest.approx(lam * distance(a, b), rel=1e-12)
