"""Gold-annotated alignment corpora: canonical JSONL and Pharaoh ingestion."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import DataError


class LinkSetting(Enum):
    """Which gold links count as reference alignments."""

    SURE_ONLY = "sure"
    SURE_AND_POSSIBLE = "sure+possible"


@dataclass(frozen=True)
class SentencePair:
    """A tokenized source/target sentence pair. Indices are 0-based."""

    id: str
    source: tuple[str, ...]
    target: tuple[str, ...]

    def __post_init__(self):
        if len(self.source) < 1 or len(self.target) < 1:
            raise DataError(f"pair {self.id!r}: source and target must be non-empty")
        if any(not t for t in self.source) or any(not t for t in self.target):
            raise DataError(f"pair {self.id!r}: tokens must be non-empty strings")

    @property
    def n(self) -> int:
        return len(self.source)

    @property
    def m(self) -> int:
        return len(self.target)


@dataclass(frozen=True)
class GoldAlignment:
    """Annotated link sets. `possible` holds only links that are not sure."""

    sure: frozenset[tuple[int, int]]
    possible: frozenset[tuple[int, int]]

    @classmethod
    def build(cls, sure, possible) -> "GoldAlignment":
        """Deduplicate and keep sure/possible disjoint."""
        sure_set = frozenset((int(i), int(j)) for i, j in sure)
        poss_set = frozenset((int(i), int(j)) for i, j in possible) - sure_set
        return cls(sure=sure_set, possible=poss_set)


@dataclass(frozen=True)
class AlignedCorpus:
    """Sentence pairs with their gold alignments, ids unique."""

    pairs: tuple[tuple[SentencePair, GoldAlignment], ...]

    def __post_init__(self):
        seen: set[str] = set()
        for pair, gold in self.pairs:
            if pair.id in seen:
                raise DataError(f"duplicate pair id {pair.id!r}")
            seen.add(pair.id)
            for i, j in gold.sure | gold.possible:
                if not (0 <= i < pair.n and 0 <= j < pair.m):
                    raise DataError(
                        f"pair {pair.id!r}: link ({i}, {j}) index out of range "
                        f"for lengths {pair.n}x{pair.m}"
                    )

    def __len__(self) -> int:
        return len(self.pairs)

    def ids(self) -> list[str]:
        return [pair.id for pair, _ in self.pairs]


def parse_canonical(path) -> AlignedCorpus:
    """Read a canonical JSON-lines corpus file.

    Each line is one object with keys `id`, `source`, `target`, `sure`,
    `possible`; link indices are 0-based.
    """
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
            try:
                pair = SentencePair(
                    id=str(obj["id"]),
                    source=tuple(obj["source"]),
                    target=tuple(obj["target"]),
                )
                gold = GoldAlignment.build(obj["sure"], obj["possible"])
            except KeyError as exc:
                raise DataError(f"{path}:{lineno}: missing key {exc}") from exc
            except (TypeError, ValueError) as exc:
                raise DataError(f"{path}:{lineno}: bad field value: {exc}") from exc
            pairs.append((pair, gold))
    try:
        return AlignedCorpus(pairs=tuple(pairs))
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from exc


def serialize_canonical(corpus: AlignedCorpus, path) -> None:
    """Write a corpus in the canonical JSON-lines format (links sorted)."""
    with open(path, "w", encoding="utf-8") as fh:
        for pair, gold in corpus.pairs:
            obj = {
                "id": pair.id,
                "source": list(pair.source),
                "target": list(pair.target),
                "sure": [list(p) for p in sorted(gold.sure)],
                "possible": [list(p) for p in sorted(gold.possible)],
            }
            fh.write(json.dumps(obj, ensure_ascii=False, separators=(",", ":")))
            fh.write("\n")


_LINK_RE = re.compile(r"^(\d+)([-p?])(\d+)$")


def parse_pharaoh(src_path, tgt_path, align_path, one_based: bool = False) -> AlignedCorpus:
    """Convert the `i-j` / `i?j` / `ipj` text distribution format.

    `-` marks sure links, `?` or `p` possible ones. The three files must
    have equal line counts; `one_based` shifts all indices down by 1.
    """
    src_lines = Path(src_path).read_text(encoding="utf-8").splitlines()
    tgt_lines = Path(tgt_path).read_text(encoding="utf-8").splitlines()
    align_lines = Path(align_path).read_text(encoding="utf-8").splitlines()
    counts = {len(src_lines), len(tgt_lines), len(align_lines)}
    if len(counts) != 1:
        raise DataError(
            f"line-count mismatch: source {len(src_lines)}, target "
            f"{len(tgt_lines)}, alignment {len(align_lines)}"
        )

    shift = 1 if one_based else 0
    pairs = []
    for lineno, (src, tgt, al) in enumerate(
        zip(src_lines, tgt_lines, align_lines), start=1
    ):
        pair = SentencePair(id=str(lineno), source=tuple(src.split()), target=tuple(tgt.split()))
        sure, possible = [], []
        for token in al.split():
            match = _LINK_RE.match(token)
            if match is None:
                raise DataError(f"{align_path}:{lineno}: unparsable link token {token!r}")
            i = int(match.group(1)) - shift
            j = int(match.group(3)) - shift
            (sure if match.group(2) == "-" else possible).append((i, j))
        gold = GoldAlignment.build(sure, possible)
        for i, j in gold.sure | gold.possible:
            if not (0 <= i < pair.n and 0 <= j < pair.m):
                raise DataError(
                    f"{align_path}:{lineno}: link ({i}, {j}) out of range "
                    f"for lengths {pair.n}x{pair.m}"
                )
        pairs.append((pair, gold))
    return AlignedCorpus(pairs=tuple(pairs))


def select_links(gold: GoldAlignment, setting: LinkSetting) -> frozenset[tuple[int, int]]:
    """Reference link set under the given setting."""
    if setting is LinkSetting.SURE_ONLY:
        return gold.sure
    return gold.sure | gold.possible


def null_ratio(pair: SentencePair, links) -> float:
    """Fraction of words on either side that no link touches."""
    covered_src = {i for i, _ in links}
    covered_tgt = {j for _, j in links}
    nulls = (pair.n - len(covered_src)) + (pair.m - len(covered_tgt))
    return nulls / (pair.n + pair.m)
