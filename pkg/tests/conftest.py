import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wordot.corpus import AlignedCorpus, GoldAlignment, SentencePair
from wordot.embeddings import EmbeddingTable


def make_corpus(specs) -> AlignedCorpus:
    """Build a corpus from (id, n, m, sure, possible) tuples."""
    pairs = []
    for pid, n, m, sure, possible in specs:
        pair = SentencePair(
            id=pid,
            source=tuple(f"s{i}" for i in range(n)),
            target=tuple(f"t{j}" for j in range(m)),
        )
        pairs.append((pair, GoldAlignment.build(sure, possible)))
    return AlignedCorpus(pairs=tuple(pairs))


def make_table(corpus: AlignedCorpus, dim: int = 4, seed: int = 0) -> EmbeddingTable:
    rng = np.random.default_rng(seed)
    entries = {
        pair.id: (rng.normal(size=(pair.n, dim)), rng.normal(size=(pair.m, dim)))
        for pair, _ in corpus.pairs
    }
    return EmbeddingTable(dim=dim, entries=entries)


@pytest.fixture
def tiny_corpus() -> AlignedCorpus:
    return make_corpus([
        ("p1", 2, 2, [(0, 0), (1, 1)], []),
        ("p2", 3, 2, [(0, 0)], [(2, 1)]),
        ("p3", 1, 3, [(0, 1)], []),
    ])
