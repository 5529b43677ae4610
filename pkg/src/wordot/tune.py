"""Validation-set grid search over threshold and solver hyperparameters."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

from .aligner import AlignConfig, OTKind, minmax_scale_coupling, solve_pair, threshold_align
from .corpus import AlignedCorpus, LinkSetting
from .embeddings import EmbeddingTable, corpus_mean_center, validate_against
from .errors import DataError
from .evaluation import corpus_metrics

logger = logging.getLogger(__name__)


def _frange(start: float, stop: float, step: float) -> tuple[float, ...]:
    count = int(round((stop - start) / step)) + 1
    return tuple(round(start + i * step, 10) for i in range(count))


@dataclass(frozen=True)
class GridSpec:
    """Axes of the hyperparameter grid.

    The threshold axis always applies; the mass-fraction axis applies
    only to partial transport and the tau axis only to unbalanced
    transport. The distortion axis is an explicit list.
    """

    thresholds: tuple[float, ...] = _frange(0.0, 1.0, 0.01)
    m_fractions: tuple[float, ...] = _frange(0.0, 1.0, 0.02)
    taus: tuple[float, ...] = _frange(0.0, 1.0, 0.02)
    kappas: tuple[float, ...] = _frange(0.0, 1.0, 0.1)

    def __post_init__(self):
        for name in ("thresholds", "m_fractions", "taus", "kappas"):
            axis = getattr(self, name)
            if not axis:
                raise ValueError(f"grid axis {name} must be non-empty")
        for name in ("thresholds", "m_fractions", "taus"):
            if any(not 0.0 <= v <= 1.0 for v in getattr(self, name)):
                raise ValueError(f"grid axis {name} must lie within [0, 1]")
        if any(v < 0 for v in self.kappas):
            raise ValueError("distortion values must be nonnegative")


def _solver_axis(ot_kind: OTKind, grid: GridSpec) -> tuple[str | None, tuple[float, ...]]:
    if ot_kind is OTKind.POT:
        if len(grid.taus) > 1:
            logger.info("tau axis does not apply to partial transport; ignored")
        return "m_fraction", grid.m_fractions
    if ot_kind is OTKind.UOT:
        if len(grid.m_fractions) > 1:
            logger.info("mass-fraction axis does not apply to unbalanced transport; ignored")
        return "tau", grid.taus
    if len(grid.m_fractions) > 1 or len(grid.taus) > 1:
        logger.info("mass-fraction/tau axes do not apply to balanced transport; ignored")
    return None, (0.0,)


def grid_search(corpus: AlignedCorpus, table: EmbeddingTable, base_config: AlignConfig,
                grid: GridSpec, setting: LinkSetting,
                log_path=None) -> tuple[AlignConfig, float]:
    """Exhaustively evaluate the applicable grid and return the argmax.

    Per solver setting the coupling is computed once per pair and every
    threshold is swept over the cached scaled plan. Ties break toward
    the smaller threshold, then the smaller solver parameter, then the
    smaller distortion.
    """
    if len(corpus) == 0:
        raise DataError("validation corpus is empty")
    validate_against(table, corpus)
    if base_config.centering:
        table = corpus_mean_center(table)
    work_config = replace(base_config, centering=False)

    param_name, param_axis = _solver_axis(base_config.ot_kind, grid)
    rows: list[tuple[float, float, float, float]] = []
    best_f1 = -1.0
    best_key: tuple[float, float, float] | None = None
    best_config = None

    for kappa in grid.kappas:
        for param in param_axis:
            solver = work_config.solver
            if param_name is not None:
                solver = replace(solver, **{param_name: param})
            config = replace(work_config, kappa=kappa, solver=solver)
            scaled_plans = [
                minmax_scale_coupling(solve_pair(*table.entries[pair.id], config))
                for pair, _ in corpus.pairs
            ]
            for threshold in grid.thresholds:
                predictions = {
                    pair.id: threshold_align(plan, threshold)
                    for (pair, _), plan in zip(corpus.pairs, scaled_plans)
                }
                f1 = corpus_metrics(predictions, corpus, setting).macro_f1
                rows.append((kappa, param, threshold, f1))
                key = (threshold, param, kappa)
                if f1 > best_f1 or (f1 == best_f1 and key < best_key):
                    best_f1 = f1
                    best_key = key
                    best_config = replace(config, threshold=threshold,
                                          centering=base_config.centering)

    if log_path is not None:
        param_col = param_name or "param"
        with open(log_path, "w", encoding="utf-8") as fh:
            fh.write(f"kappa\t{param_col}\tlambda\tmacro_f1\n")
            for kappa, param, threshold, f1 in rows:
                fh.write(f"{kappa}\t{param}\t{threshold}\t{f1:.6f}\n")
    return best_config, best_f1
