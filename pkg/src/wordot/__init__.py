"""Unbalanced monolingual word alignment with optimal transport."""

__version__ = "0.1.0"

from .aligner import (
    AlignConfig,
    AlignmentPrediction,
    OTKind,
    align_corpus,
    align_pair,
    minmax_scale_coupling,
    naive_cost_threshold,
    threshold_align,
)
from .corpus import (
    AlignedCorpus,
    GoldAlignment,
    LinkSetting,
    SentencePair,
    null_ratio,
    parse_canonical,
    parse_pharaoh,
    select_links,
    serialize_canonical,
)
from .cost import CostMatrix, DistanceMetric, apply_distortion, build_cost, distance_matrix, minmax_scale
from .embeddings import (
    EmbeddingTable,
    corpus_mean_center,
    load_embeddings,
    validate_against,
    write_embeddings,
)
from .errors import DataError, NumericalError
from .evaluation import EvalReport, PairScore, bin_by_null_ratio, corpus_metrics, pair_metrics
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
from .tune import GridSpec, grid_search
