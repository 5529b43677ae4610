"""Null-aware precision/recall/F1 and null-ratio binned reports.

A word with no link is treated as aligned to a virtual null word, and
those null attachments are scored alongside ordinary link pairs:

    precision = (pair hits + null hits) / (predicted pairs + predicted nulls)
    recall    = (pair hits + null hits) / (gold pairs + gold nulls)

Source-side and target-side null words are distinct elements, so a null
source word never matches a null target word.
"""

from __future__ import annotations

from dataclasses import dataclass

from .aligner import AlignmentPrediction
from .corpus import AlignedCorpus, LinkSetting, null_ratio, select_links
from .errors import DataError


@dataclass(frozen=True)
class PairScore:
    """Score of one sentence pair, with the counts it derives from.

    counts = (pair_hits, null_hits, pred_pairs, pred_nulls, gold_pairs,
    gold_nulls).
    """

    precision: float
    recall: float
    counts: tuple[int, int, int, int, int, int]

    @property
    def f1(self) -> float:
        if self.precision + self.recall == 0:
            return 0.0
        return 2 * self.precision * self.recall / (self.precision + self.recall)


@dataclass(frozen=True)
class EvalReport:
    """Corpus-level macro scores plus the per-pair breakdown.

    ``macro_f1`` is the harmonic mean of the macro precision and recall;
    ``mean_pair_f1`` (the mean of per-pair F1 values) is reported
    alongside for reference.
    """

    macro_precision: float
    macro_recall: float
    macro_f1: float
    mean_pair_f1: float
    per_pair: tuple[PairScore, ...]
    setting: LinkSetting


@dataclass(frozen=True)
class NullRatioBin:
    """One quantile bin of the null-ratio report."""

    ratio_lo: float
    ratio_hi: float
    mean_f1: float
    count: int


def _nulls(links, n: int, m: int) -> frozenset:
    covered_src = {i for i, _ in links}
    covered_tgt = {j for _, j in links}
    return frozenset(
        [("s", i) for i in range(n) if i not in covered_src]
        + [("t", j) for j in range(m) if j not in covered_tgt]
    )


def pair_metrics(pred: AlignmentPrediction, gold_links, n: int, m: int) -> PairScore:
    """Null-aware precision and recall for one sentence pair."""
    if n < 1 or m < 1:
        raise ValueError("sentences must be non-empty")
    gold_pairs = frozenset(gold_links)
    for i, j in gold_pairs | pred.pairs:
        if not (0 <= i < n and 0 <= j < m):
            raise ValueError(f"link ({i}, {j}) out of range for {n}x{m}")
    pred_nulls = _nulls(pred.pairs, n, m)
    gold_nulls = _nulls(gold_pairs, n, m)
    pair_hits = len(pred.pairs & gold_pairs)
    null_hits = len(pred_nulls & gold_nulls)
    counts = (pair_hits, null_hits, len(pred.pairs), len(pred_nulls),
              len(gold_pairs), len(gold_nulls))
    precision = (pair_hits + null_hits) / (len(pred.pairs) + len(pred_nulls))
    recall = (pair_hits + null_hits) / (len(gold_pairs) + len(gold_nulls))
    return PairScore(precision=precision, recall=recall, counts=counts)


def corpus_metrics(predictions, corpus: AlignedCorpus, setting: LinkSetting) -> EvalReport:
    """Macro-averaged scores over a corpus; predictions matched by id."""
    if len(corpus) == 0:
        raise DataError("cannot evaluate an empty corpus")
    scores = []
    for pair, gold in corpus.pairs:
        if pair.id not in predictions:
            raise DataError(f"no prediction for pair id {pair.id!r}")
        links = select_links(gold, setting)
        scores.append(pair_metrics(predictions[pair.id], links, pair.n, pair.m))
    macro_p = sum(s.precision for s in scores) / len(scores)
    macro_r = sum(s.recall for s in scores) / len(scores)
    macro_f1 = 2 * macro_p * macro_r / (macro_p + macro_r) if macro_p + macro_r else 0.0
    mean_pair_f1 = sum(s.f1 for s in scores) / len(scores)
    return EvalReport(macro_precision=macro_p, macro_recall=macro_r,
                      macro_f1=macro_f1, mean_pair_f1=mean_pair_f1,
                      per_pair=tuple(scores), setting=setting)


def bin_by_null_ratio(corpus: AlignedCorpus, predictions, setting: LinkSetting,
                      k: int) -> list[NullRatioBin]:
    """Quantile-bin pairs by gold null ratio and report mean per-pair F1.

    Bin sizes differ by at most one; ties in ratio are ordered by pair
    id so the split is deterministic.
    """
    if k < 1:
        raise ValueError("bin count must be at least 1")
    if k > len(corpus):
        raise DataError(f"bin count {k} exceeds corpus size {len(corpus)}")
    items = []
    for pair, gold in corpus.pairs:
        if pair.id not in predictions:
            raise DataError(f"no prediction for pair id {pair.id!r}")
        links = select_links(gold, setting)
        ratio = null_ratio(pair, links)
        score = pair_metrics(predictions[pair.id], links, pair.n, pair.m)
        items.append((ratio, pair.id, score.f1))
    items.sort(key=lambda item: (item[0], item[1]))

    total = len(items)
    base, extra = divmod(total, k)
    bins = []
    start = 0
    for b in range(k):
        size = base + (1 if b < extra else 0)
        chunk = items[start : start + size]
        start += size
        bins.append(NullRatioBin(
            ratio_lo=chunk[0][0],
            ratio_hi=chunk[-1][0],
            mean_f1=sum(f1 for _, _, f1 in chunk) / len(chunk),
            count=len(chunk),
        ))
    return bins
