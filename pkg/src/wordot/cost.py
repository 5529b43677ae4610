"""Cost matrix construction: distance, positional distortion, min-max scaling."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.spatial.distance import cdist


class DistanceMetric(Enum):
    COSINE = "cosine"
    EUCLIDEAN = "euclidean"


@dataclass(frozen=True)
class CostMatrix:
    """Nonnegative n x m dissimilarity matrix; entries in [0, 1] once scaled."""

    values: np.ndarray
    scaled: bool

    def __post_init__(self):
        if self.values.ndim != 2:
            raise ValueError("cost matrix must be two-dimensional")
        if not np.isfinite(self.values).all():
            raise ValueError("cost matrix entries must be finite")
        if (self.values < 0).any():
            raise ValueError("cost matrix entries must be nonnegative")
        if self.scaled and (self.values > 1).any():
            raise ValueError("scaled cost matrix entries must lie in [0, 1]")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def distance_matrix(source: np.ndarray, target: np.ndarray, metric: DistanceMetric) -> CostMatrix:
    """Pairwise word dissimilarities.

    Cosine entries are 1 - cos(s_i, t_j) clamped to [0, 2]; a zero-norm
    row gets similarity 0 (distance 1). Euclidean entries are plain L2
    distances.
    """
    source = np.asarray(source, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if source.ndim != 2 or target.ndim != 2 or source.shape[1] != target.shape[1]:
        raise ValueError(
            f"embedding dimension mismatch: {source.shape} vs {target.shape}"
        )
    if metric is DistanceMetric.EUCLIDEAN:
        values = cdist(source, target, metric="euclidean")
    else:
        src_norm = np.linalg.norm(source, axis=1)
        tgt_norm = np.linalg.norm(target, axis=1)
        safe_src = np.where(src_norm > 0, src_norm, 1.0)
        safe_tgt = np.where(tgt_norm > 0, tgt_norm, 1.0)
        sim = (source / safe_src[:, None]) @ (target / safe_tgt[:, None]).T
        sim[src_norm == 0, :] = 0.0
        sim[:, tgt_norm == 0] = 0.0
        values = np.clip(1.0 - sim, 0.0, 2.0)
    return CostMatrix(values=values, scaled=False)


def apply_distortion(cost: CostMatrix, kappa: float, n: int, m: int) -> CostMatrix:
    """Add the positional penalty kappa * ((i+1)/n - (j+1)/m)^2.

    Positions are 1-based over the sentence length, so equal relative
    positions contribute nothing.
    """
    if kappa < 0:
        raise ValueError(f"distortion weight must be nonnegative, got {kappa}")
    if cost.scaled:
        raise ValueError("distortion must be applied before min-max scaling")
    if cost.shape != (n, m):
        raise ValueError(f"cost matrix shape {cost.shape} does not match ({n}, {m})")
    if kappa == 0:
        return cost
    pos_src = (np.arange(n) + 1.0) / n
    pos_tgt = (np.arange(m) + 1.0) / m
    penalty = (pos_src[:, None] - pos_tgt[None, :]) ** 2
    return CostMatrix(values=cost.values + kappa * penalty, scaled=False)


def minmax_scale(cost: CostMatrix) -> CostMatrix:
    """Rescale entries to [0, 1]; a constant matrix becomes all zeros."""
    lo = cost.values.min()
    hi = cost.values.max()
    if hi > lo:
        values = (cost.values - lo) / (hi - lo)
    else:
        values = np.zeros_like(cost.values)
    return CostMatrix(values=values, scaled=True)


def build_cost(source: np.ndarray, target: np.ndarray, metric: DistanceMetric, kappa: float) -> CostMatrix:
    """Distance, then distortion, then min-max scaling."""
    dist = distance_matrix(source, target, metric)
    n, m = dist.shape
    return minmax_scale(apply_distortion(dist, kappa, n, m))
