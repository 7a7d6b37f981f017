"""Ranking metrics for streaming evaluation.

AUROC is the Mann-Whitney statistic with midrank tie handling; the
streaming summary (auc2) is the prefix mean of the per-timestep AUROC
curve up to a fraction of the stream, which weights accuracy shortly
after deployment.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class ScoredExample:
    score: float
    is_anomaly: bool


@dataclass(frozen=True)
class AucCurve:
    """AUROC per evaluated time step; ts are 1-based and ascending."""

    ts: tuple[int, ...]
    values: tuple[float, ...]
    horizon: int  # total stream length T

    def __post_init__(self) -> None:
        if len(self.ts) != len(self.values) or not self.ts:
            raise ValueError("curve needs matching, nonempty ts and values")
        if list(self.ts) != sorted(set(self.ts)) or self.ts[0] < 1 or self.ts[-1] > self.horizon:
            raise ValueError("ts must be strictly increasing within 1..horizon")


@dataclass(frozen=True)
class Auc2Summary:
    fractions: tuple[float, ...]
    scores: tuple[float, ...]


def auroc_scores(scores, is_anomaly) -> float:
    """AUROC of anomaly scores against boolean ground truth.

    Sort-based with tie-group midranks; exactly matches the O(n^2)
    pairwise statistic (1 per correctly ordered pair, 0.5 per tie).
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(is_anomaly, dtype=bool)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be matching 1-d sequences")
    if not np.isfinite(s).all():
        raise ValueError("scores must be finite")
    n_anom = int(y.sum())
    n_norm = int(len(y) - n_anom)
    if n_anom == 0 or n_norm == 0:
        raise ValueError("AUROC undefined: need at least one anomaly and one normal")
    order = np.argsort(s, kind="mergesort")
    sorted_s = s[order]
    boundaries = np.nonzero(np.diff(sorted_s))[0] + 1
    starts = np.concatenate([[0], boundaries])
    ends = np.concatenate([boundaries, [len(s)]])
    midranks_sorted = np.repeat((starts + ends + 1) / 2.0, ends - starts)
    ranks = np.empty(len(s), dtype=np.float64)
    ranks[order] = midranks_sorted
    rank_sum = ranks[y].sum()
    return float((rank_sum - n_anom * (n_anom + 1) / 2.0) / (n_anom * n_norm))


def auroc(examples: Sequence[ScoredExample]) -> float:
    """AUROC over scored examples (higher score = more anomalous)."""
    return auroc_scores([e.score for e in examples], [e.is_anomaly for e in examples])


def prefix_length(total: int, fraction: float) -> int:
    """max(1, round(fraction * total)), rounding half to even exactly."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    if total < 1:
        raise ValueError("total must be positive")
    return max(1, round(Fraction(fraction) * total))


def auc_squared(curve_values, fraction: float) -> float:
    """Mean of the per-timestep AUROC prefix covering `fraction` of the stream.

    curve_values[i] is AUC at t=i+1 (stride 1); the prefix cut is
    max(1, round(fraction * T)).
    """
    values = np.asarray(curve_values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("empty curve")
    cut = prefix_length(values.size, fraction)
    return float(values[:cut].sum() / cut)


def auc_squared_curve(curve: AucCurve, fraction: float) -> float:
    """auc_squared over an explicit (possibly strided) curve.

    Averages the evaluated points with t <= the prefix cut; a cut before
    the first evaluated step falls back to the first point.
    """
    cut = prefix_length(curve.horizon, fraction)
    vals = [v for t, v in zip(curve.ts, curve.values) if t <= cut]
    if not vals:
        vals = [curve.values[0]]
    return float(np.asarray(vals).sum() / len(vals))


def summarize(curve: AucCurve, fractions: Sequence[float]) -> Auc2Summary:
    return Auc2Summary(
        fractions=tuple(float(f) for f in fractions),
        scores=tuple(auc_squared_curve(curve, f) for f in fractions),
    )
