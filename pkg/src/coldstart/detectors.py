"""Anomaly scorers over embedding vectors.

Four scoring families share one currency (float64 vectors):

* zero-shot: distance to the nearest class descriptor embedding;
* adapted: distance to class centers that were pulled toward an unlabeled,
  possibly contaminated observation stream (assignment -> optional
  percentile filter -> robust per-class re-estimation);
* dn2: distance to the nearest previously observed query;
* adaptation variants used for ablations: mean instead of median,
  multiple assign/adapt passes, and seeded Lloyd k-means that ignores
  the descriptors except as empty-cluster fallbacks.

Everything is pure: adaptation builds a new immutable model instead of
mutating, so one model can be scored from many threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import vectors
from .rng import SplitMix64
from .vectors import COSINE, L2  # noqa: F401  (re-exported for callers)

TAU_NONE = "none"
TAU_PERCENTILE = "percentile"

ADAPT_MEDIAN = "median"
ADAPT_MEAN = "mean"
ADAPT_MULTI_ITER = "multi_iter_median"
ADAPT_KMEANS = "kmeans"
ADAPT_KINDS = (ADAPT_MEDIAN, ADAPT_MEAN, ADAPT_MULTI_ITER, ADAPT_KMEANS)


@dataclass(frozen=True, eq=False)
class ClassDescriptor:
    """A normal class: id, display name, and its descriptor embedding."""

    class_id: int
    name: str
    embedding: np.ndarray


@dataclass(frozen=True)
class TauPolicy:
    """Observation filter applied before adaptation.

    mode "none" keeps every assigned observation; mode "percentile" pools
    the assigned distances across all classes and drops observations whose
    distance exceeds the nearest-rank percentile threshold.
    """

    mode: str = TAU_NONE
    percent: float = 90.0

    def __post_init__(self) -> None:
        if self.mode not in (TAU_NONE, TAU_PERCENTILE):
            raise ValueError(f"unknown tau mode {self.mode!r}")

    @classmethod
    def none(cls) -> "TauPolicy":
        return cls(TAU_NONE)

    @classmethod
    def percentile(cls, percent: float = 90.0) -> "TauPolicy":
        return cls(TAU_PERCENTILE, percent)


@dataclass(frozen=True)
class AdaptationMethod:
    """How class centers are re-estimated from assigned observations.

    "median" (one pass, descriptor included in the pool) is the canonical
    method; "mean", "multi_iter_median", and "kmeans" are ablation
    variants. max_iters bounds the multi-iteration and Lloyd loops;
    kmeans_seed pins the k-means initialization.
    """

    kind: str = ADAPT_MEDIAN
    max_iters: int = 10
    kmeans_seed: int = 0
    recompute_tau_each_iter: bool = True

    def __post_init__(self) -> None:
        if self.kind not in ADAPT_KINDS:
            raise ValueError(f"unknown adaptation kind {self.kind!r}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass(frozen=True, eq=False)
class AdaptedModel:
    """Immutable result of adaptation.

    centers[k] is the adapted embedding for class k; classes that kept no
    observations retain their descriptor embedding bit-identically.
    assignments/kept_mask record, per observation, the class it fed and
    whether it survived the filter.
    """

    centers: np.ndarray
    assignments: np.ndarray
    kept_mask: np.ndarray


def descriptor_matrix(descriptors: list[ClassDescriptor]) -> np.ndarray:
    """(K, dim) matrix with row k = descriptor embedding of class k."""
    if not descriptors:
        raise ValueError("at least one class descriptor is required")
    ids = sorted(d.class_id for d in descriptors)
    if ids != list(range(len(descriptors))):
        raise ValueError(f"class ids must be contiguous 0..K-1, got {ids}")
    rows = [None] * len(descriptors)
    for d in descriptors:
        rows[d.class_id] = vectors.as_vector(d.embedding)
    return np.stack(rows)


def zs_score(x, descriptors: list[ClassDescriptor], metric: str = L2) -> float:
    """Distance to the nearest class descriptor (higher = more anomalous)."""
    desc = descriptor_matrix(descriptors)
    return float(vectors.min_distances(vectors.as_vector(x)[None, :], desc, metric)[0])


def assign(observations, descriptors: list[ClassDescriptor],
           metric: str = L2) -> list[tuple[int, float]]:
    """Map each observation to its nearest class; ties take the lowest id."""
    desc = descriptor_matrix(descriptors)
    idx, dist = vectors.nearest_indices(observations, desc, metric)
    return [(int(i), float(d)) for i, d in zip(idx, dist)]


def dn2_score(x, observed, metric: str = L2) -> float:
    """1-nearest-neighbor distance to previous observations.

    The stream protocol only evaluates from the first observation onward,
    so an empty history is a caller bug, not a scoreable state.
    """
    xv = vectors.as_vector(x)
    obs = vectors.as_matrix(observed, dim=xv.size)
    if obs.shape[0] == 0:
        raise ValueError("dn2 requires at least one previous observation")
    return float(vectors.min_distances(xv[None, :], obs, metric)[0])


def coldfusion_score(x, model: AdaptedModel, metric: str = L2) -> float:
    """Distance to the nearest adapted class center."""
    return float(vectors.min_distances(
        vectors.as_vector(x)[None, :], model.centers, metric)[0])


def adapt(descriptors: list[ClassDescriptor], observations,
          tau: TauPolicy | None = None,
          method: AdaptationMethod | None = None,
          metric: str = L2,
          precomputed: tuple[np.ndarray, np.ndarray] | None = None) -> AdaptedModel:
    """Adapt class centers toward a contaminated observation stream.

    Pipeline: assign every observation to its nearest descriptor, pool the
    assigned distances across classes for the optional percentile filter,
    then re-estimate the surviving classes per `method`. Classes that keep
    no observations return their descriptor embedding unchanged, so with
    zero observations the model scores identically to the zero-shot path.

    `precomputed` optionally supplies the (indices, distances) of the
    initial nearest-descriptor assignment; the streaming harness caches
    this per observation since descriptors never move.
    """
    tau = tau if tau is not None else TauPolicy.none()
    method = method if method is not None else AdaptationMethod()
    desc = descriptor_matrix(descriptors)
    obs = vectors.as_matrix(observations, dim=desc.shape[1])
    if obs.shape[0] and obs.shape[1] != desc.shape[1]:
        raise ValueError(f"dimension mismatch: {obs.shape[1]} vs {desc.shape[1]}")

    if obs.shape[0] == 0:
        return AdaptedModel(centers=desc.copy(),
                            assignments=np.empty(0, dtype=np.int64),
                            kept_mask=np.empty(0, dtype=bool))

    if precomputed is None:
        idx, dist = vectors.nearest_indices(obs, desc, metric)
    else:
        idx = np.asarray(precomputed[0], dtype=np.int64)
        dist = np.asarray(precomputed[1], dtype=np.float64)
        if idx.shape != (obs.shape[0],) or dist.shape != (obs.shape[0],):
            raise ValueError("precomputed assignment length does not match observations")

    kept = _kept_mask(dist, tau)

    if method.kind in (ADAPT_MEDIAN, ADAPT_MEAN):
        reducer = np.median if method.kind == ADAPT_MEDIAN else np.mean
        centers = _pool_centers(desc, obs, idx, kept, reducer)
        return AdaptedModel(centers, idx, kept)
    if method.kind == ADAPT_MULTI_ITER:
        return _adapt_multi_iter(desc, obs, idx, dist, kept, tau, method, metric)
    return _adapt_kmeans(desc, obs, kept, method, metric)


def _kept_mask(distances: np.ndarray, tau: TauPolicy,
               threshold: float | None = None) -> np.ndarray:
    if tau.mode == TAU_NONE:
        return np.ones(distances.shape[0], dtype=bool)
    thr = vectors.percentile(distances, tau.percent) if threshold is None else threshold
    return distances <= thr


def _pool_centers(desc: np.ndarray, obs: np.ndarray, idx: np.ndarray,
                  kept: np.ndarray, reducer) -> np.ndarray:
    """Per class: reducer over {descriptor} U kept assigned observations."""
    centers = desc.copy()
    for k in range(desc.shape[0]):
        members = obs[kept & (idx == k)]
        if members.shape[0]:
            pool = np.concatenate([desc[k][None, :], members], axis=0)
            centers[k] = reducer(pool, axis=0)
    return centers


def _adapt_multi_iter(desc, obs, idx, dist, kept, tau, method, metric) -> AdaptedModel:
    # First pass is exactly the single-pass median (so max_iters=1 == median).
    centers = _pool_centers(desc, obs, idx, kept, np.median)
    frozen_tau = None
    if tau.mode == TAU_PERCENTILE and not method.recompute_tau_each_iter:
        frozen_tau = vectors.percentile(dist, tau.percent)
    prev_idx, prev_kept = idx, kept
    for _ in range(1, method.max_iters):
        idx_i, dist_i = vectors.nearest_indices(obs, centers, metric)
        kept_i = _kept_mask(dist_i, tau, threshold=frozen_tau)
        if np.array_equal(idx_i, prev_idx) and np.array_equal(kept_i, prev_kept):
            break
        centers = _pool_centers(desc, obs, idx_i, kept_i, np.median)
        prev_idx, prev_kept = idx_i, kept_i
    return AdaptedModel(centers, prev_idx, prev_kept)


def _adapt_kmeans(desc, obs, kept, method, metric) -> AdaptedModel:
    """Seeded Lloyd iterations on the surviving observations.

    Descriptors are deliberately excluded from clustering; they only seed
    the init when there are fewer observations than clusters and fill
    empty clusters so scoring stays total over all K classes.
    """
    k_classes = desc.shape[0]
    work = obs[kept]
    if work.shape[0] >= k_classes:
        picks = SplitMix64(method.kmeans_seed).sample_indices(work.shape[0], k_classes)
        centers = work[np.asarray(picks, dtype=np.intp)].copy()
    else:
        centers = desc.copy()
    prev = None
    for _ in range(method.max_iters):
        if work.shape[0] == 0:
            break
        cidx, _ = vectors.nearest_indices(work, centers, metric)
        if prev is not None and np.array_equal(cidx, prev):
            break
        new_centers = desc.copy()
        for k in range(k_classes):
            members = work[cidx == k]
            if members.shape[0]:
                new_centers[k] = members.mean(axis=0)
        centers = new_centers
        prev = cidx
    final_idx, _ = vectors.nearest_indices(obs, centers, metric)
    return AdaptedModel(centers, final_idx, kept)
