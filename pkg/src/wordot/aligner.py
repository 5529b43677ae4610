"""Per-pair alignment pipeline: cost, masses, solver, scaling, threshold."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .corpus import AlignedCorpus, SentencePair
from .cost import CostMatrix, DistanceMetric, build_cost
from .embeddings import EmbeddingTable, corpus_mean_center, validate_against
from .errors import DataError
from .fertility import MassKind, MassVector, norm_mass, normalize_simplex, uniform_mass
from .solvers import (
    Coupling,
    SolverConfig,
    exact_bot,
    exact_pot,
    sinkhorn_bot,
    sinkhorn_pot,
    sinkhorn_uot,
)


class OTKind(Enum):
    BOT = "bot"
    POT = "pot"
    UOT = "uot"


@dataclass(frozen=True)
class AlignmentPrediction:
    """Sparse alignment: retained (i, j) pairs with their plan weights."""

    pairs: frozenset[tuple[int, int]]
    weights: dict[tuple[int, int], float]
    n: int
    m: int

    def __post_init__(self):
        for i, j in self.pairs:
            if not (0 <= i < self.n and 0 <= j < self.m):
                raise ValueError(f"pair ({i}, {j}) out of range for {self.n}x{self.m}")


@dataclass(frozen=True)
class AlignConfig:
    """Full pipeline configuration for one alignment run."""

    ot_kind: OTKind
    regularized: bool = True
    metric: DistanceMetric = DistanceMetric.COSINE
    mass: MassKind = MassKind.UNIFORM
    kappa: float = 0.0
    threshold: float = 0.0
    solver: SolverConfig = field(default_factory=SolverConfig)
    centering: bool = False

    def __post_init__(self):
        if self.ot_kind is OTKind.UOT and not self.regularized:
            raise ValueError("unbalanced transport is only available in entropic form")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must lie in [0, 1], got {self.threshold}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be nonnegative, got {self.kappa}")


def minmax_scale_coupling(coupling: Coupling) -> np.ndarray:
    """Rescale a plan to [0, 1].

    A degenerate constant plan maps to all ones when positive (the
    solver spread full confidence evenly) and to all zeros when zero.
    """
    plan = coupling.plan
    lo = plan.min()
    hi = plan.max()
    if hi > lo:
        return (plan - lo) / (hi - lo)
    if hi > 0:
        return np.ones_like(plan)
    return np.zeros_like(plan)


def threshold_align(scaled_plan: np.ndarray, threshold: float) -> AlignmentPrediction:
    """Keep entries strictly greater than the threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold}")
    if scaled_plan.min() < 0 or scaled_plan.max() > 1:
        raise ValueError("plan must be min-max scaled to [0, 1] before thresholding")
    kept = np.argwhere(scaled_plan > threshold)
    pairs = frozenset((int(i), int(j)) for i, j in kept)
    weights = {(int(i), int(j)): float(scaled_plan[i, j]) for i, j in kept}
    return AlignmentPrediction(pairs=pairs, weights=weights,
                               n=scaled_plan.shape[0], m=scaled_plan.shape[1])


def naive_cost_threshold(cost: CostMatrix, cost_threshold: float) -> AlignmentPrediction:
    """Baseline: align word pairs whose scaled cost is below the threshold."""
    if not cost.scaled:
        raise ValueError("naive thresholding requires a scaled cost matrix")
    if not 0.0 <= cost_threshold <= 1.0:
        raise ValueError(f"cost threshold must lie in [0, 1], got {cost_threshold}")
    kept = np.argwhere(cost.values < cost_threshold)
    pairs = frozenset((int(i), int(j)) for i, j in kept)
    weights = {(int(i), int(j)): float(1.0 - cost.values[i, j]) for i, j in kept}
    return AlignmentPrediction(pairs=pairs, weights=weights,
                               n=cost.shape[0], m=cost.shape[1])


def _masses(source: np.ndarray, target: np.ndarray, kind: MassKind) -> tuple[MassVector, MassVector]:
    if kind is MassKind.UNIFORM:
        return uniform_mass(source.shape[0]), uniform_mass(target.shape[0])
    return norm_mass(source), norm_mass(target)


def solve_pair(source: np.ndarray, target: np.ndarray, config: AlignConfig) -> Coupling:
    """Build cost and masses for one pair and run the configured solver."""
    cost = build_cost(source, target, config.metric, config.kappa)
    a, b = _masses(source, target, config.mass)
    if config.ot_kind is OTKind.BOT:
        a, b = normalize_simplex(a), normalize_simplex(b)
        if config.regularized:
            return sinkhorn_bot(cost, a, b, config.solver)
        return exact_bot(cost, a, b)
    if config.ot_kind is OTKind.POT:
        mass = config.solver.m_fraction * min(a.total, b.total)
        if config.regularized:
            return sinkhorn_pot(cost, a, b, mass, config.solver)
        return exact_pot(cost, a, b, mass)
    return sinkhorn_uot(cost, a, b, config.solver)


def align_pair(pair: SentencePair, source: np.ndarray, target: np.ndarray,
               config: AlignConfig) -> AlignmentPrediction:
    """Full pipeline for one sentence pair."""
    if source.shape[0] != pair.n or target.shape[0] != pair.m:
        raise DataError(
            f"pair {pair.id!r}: embedding rows ({source.shape[0]}, {target.shape[0]}) "
            f"do not match sentence lengths ({pair.n}, {pair.m})"
        )
    coupling = solve_pair(source, target, config)
    return threshold_align(minmax_scale_coupling(coupling), config.threshold)


def align_corpus(corpus: AlignedCorpus, table: EmbeddingTable, config: AlignConfig,
                 jobs: int = 1) -> list[AlignmentPrediction]:
    """Align every pair, in corpus order regardless of worker count."""
    validate_against(table, corpus)
    if config.centering:
        table = corpus_mean_center(table)

    def run(pair: SentencePair) -> AlignmentPrediction:
        source, target = table.entries[pair.id]
        return align_pair(pair, source, target, config)

    sentence_pairs = [pair for pair, _ in corpus.pairs]
    if jobs <= 1:
        return [run(pair) for pair in sentence_pairs]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run, sentence_pairs))


def write_predictions(path, corpus: AlignedCorpus, predictions) -> None:
    """Dump predictions as JSON lines: {"id", "pairs": [[i, j, weight], ...]}."""
    if len(predictions) != len(corpus.pairs):
        raise ValueError("one prediction per corpus pair required")
    with open(path, "w", encoding="utf-8") as fh:
        for (pair, _), pred in zip(corpus.pairs, predictions):
            rows = [[i, j, pred.weights[(i, j)]] for i, j in sorted(pred.pairs)]
            fh.write(json.dumps({"id": pair.id, "pairs": rows}, separators=(",", ":")))
            fh.write("\n")


def load_predictions(path) -> dict[str, list[tuple[int, int, float]]]:
    """Read a prediction dump back into an id-keyed mapping."""
    out: dict[str, list[tuple[int, int, float]]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                pid = str(obj["id"])
                rows = [(int(i), int(j), float(w)) for i, j, w in obj["pairs"]]
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise DataError(f"{path}:{lineno}: bad prediction line: {exc}") from exc
            if pid in out:
                raise DataError(f"{path}:{lineno}: duplicate prediction id {pid!r}")
            out[pid] = rows
    return out


def prediction_from_rows(rows, n: int, m: int) -> AlignmentPrediction:
    """Rebuild an AlignmentPrediction from dumped [i, j, weight] rows."""
    pairs = frozenset((i, j) for i, j, _ in rows)
    weights = {(i, j): w for i, j, w in rows}
    return AlignmentPrediction(pairs=pairs, weights=weights, n=n, m=m)
