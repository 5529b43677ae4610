"""Word mass vectors: uniform and embedding-norm fertility."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

NORM_FLOOR = 1e-8


class MassKind(Enum):
    UNIFORM = "uniform"
    NORM = "norm"


@dataclass(frozen=True)
class MassVector:
    """Strictly positive per-word weights; sums to 1 when normalized."""

    values: np.ndarray
    normalized: bool

    def __post_init__(self):
        if self.values.ndim != 1 or self.values.size < 1:
            raise ValueError("mass vector must be a non-empty 1-d array")
        if not np.isfinite(self.values).all() or (self.values <= 0).any():
            raise ValueError("mass entries must be finite and strictly positive")
        if self.normalized and abs(self.values.sum() - 1.0) > 1e-9:
            raise ValueError("normalized mass must sum to 1")

    @property
    def total(self) -> float:
        return float(self.values.sum())


def uniform_mass(n: int) -> MassVector:
    """Every word gets 1/n."""
    if n < 1:
        raise ValueError(f"sentence length must be positive, got {n}")
    return MassVector(values=np.full(n, 1.0 / n), normalized=True)


def norm_mass(embeddings: np.ndarray) -> MassVector:
    """L2 norm of each word vector, floored at a tiny positive value."""
    embeddings = np.asarray(embeddings, dtype=np.float64)
    if embeddings.ndim != 2 or embeddings.shape[0] < 1:
        raise ValueError("embedding matrix must be 2-d with at least one row")
    norms = np.linalg.norm(embeddings, axis=1)
    return MassVector(values=np.maximum(norms, NORM_FLOOR), normalized=False)


def normalize_simplex(mass: MassVector) -> MassVector:
    """Scale entries to sum to 1."""
    return MassVector(values=mass.values / mass.values.sum(), normalized=True)
