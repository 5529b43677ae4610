"""Word embedding extraction from a pre-trained masked language model.

Each sentence pair is packed into one model input (two segments by
default), the hidden states of a chosen layer are taken, and every
word's vector is the mean of its subword vectors. Special and padding
tokens are never pooled. Sequences longer than the model limit are
rejected rather than truncated, because truncation would silently
corrupt word indices.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np
import torch

from . import emb1
from .corpus_io import read_pairs


class ExtractError(Exception):
    pass


@dataclass(frozen=True)
class ExtractorConfig:
    model: str = "bert-base-uncased"
    layer: int = 10
    batch_size: int = 8
    device: str = "cpu"
    packing: str = "pair"  # "pair": native two-segment input; "single": one segment

    def __post_init__(self):
        if self.layer < 0:
            raise ValueError(f"layer must be nonnegative, got {self.layer}")
        if self.batch_size < 1:
            raise ValueError("batch size must be at least 1")
        if self.packing not in ("pair", "single"):
            raise ValueError(f"unknown packing {self.packing!r}")


def _load_model(config: ExtractorConfig):
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(config.model)
        model = AutoModel.from_pretrained(config.model)
    except Exception as exc:
        raise ExtractError(f"failed to load model {config.model!r}: {exc}") from exc
    if not tokenizer.is_fast:
        raise ExtractError("a fast tokenizer is required for subword-to-word mapping")
    depth = model.config.num_hidden_layers
    if config.layer > depth:
        raise ExtractError(f"layer {config.layer} out of range for model depth {depth}")
    model.eval()
    model.to(config.device)
    return tokenizer, model


def _sequence_limit(tokenizer, model) -> int:
    limit = getattr(model.config, "max_position_embeddings", None) or 1 << 30
    tokenizer_limit = tokenizer.model_max_length
    if tokenizer_limit and tokenizer_limit < 1 << 20:
        limit = min(limit, tokenizer_limit)
    return limit


def _pool_words(hidden: torch.Tensor, positions_per_word: list[list[int]]) -> np.ndarray:
    rows = [hidden[positions].mean(dim=0) for positions in positions_per_word]
    return torch.stack(rows).to(torch.float32).cpu().numpy()


def _word_positions(encoding, index: int, n: int, m: int, packing: str, pid: str):
    """Per-word token positions for the source and target of one pair."""
    word_ids = encoding.word_ids(index)
    sequence_ids = encoding.sequence_ids(index)
    source = [[] for _ in range(n)]
    target = [[] for _ in range(m)]
    for position, (word, sequence) in enumerate(zip(word_ids, sequence_ids)):
        if word is None:
            continue  # special or padding token
        if packing == "pair":
            bucket = source if sequence == 0 else target
            offset = word
        else:
            bucket = source if word < n else target
            offset = word if word < n else word - n
        bucket[offset].append(position)
    for side, words in (("source", source), ("target", target)):
        for k, positions in enumerate(words):
            if not positions:
                raise ExtractError(
                    f"pair {pid!r}: {side} word {k} produced no subword tokens"
                )
    return source, target


def extract(corpus_path, config: ExtractorConfig, out_path) -> int:
    """Extract embeddings for every pair and write the EMB1 file.

    Returns the number of pairs written.
    """
    pairs = read_pairs(corpus_path)
    tokenizer, model = _load_model(config)
    limit = _sequence_limit(tokenizer, model)
    records = []
    with torch.no_grad():
        for start in range(0, len(pairs), config.batch_size):
            batch = pairs[start : start + config.batch_size]
            if config.packing == "pair":
                encoding = tokenizer(
                    [src for _, src, _ in batch],
                    [tgt for _, _, tgt in batch],
                    is_split_into_words=True, padding=True, return_tensors="pt",
                )
            else:
                encoding = tokenizer(
                    [src + tgt for _, src, tgt in batch],
                    is_split_into_words=True, padding=True, return_tensors="pt",
                )
            for index, (pid, _, _) in enumerate(batch):
                length = int(encoding["attention_mask"][index].sum())
                if length > limit:
                    raise ExtractError(
                        f"pair {pid!r}: packed sequence of {length} tokens exceeds "
                        f"the model limit of {limit}"
                    )
            inputs = {k: v.to(config.device) for k, v in encoding.items()}
            outputs = model(**inputs, output_hidden_states=True)
            hidden = outputs.hidden_states[config.layer]
            for index, (pid, src, tgt) in enumerate(batch):
                src_pos, tgt_pos = _word_positions(
                    encoding, index, len(src), len(tgt), config.packing, pid)
                records.append((
                    pid,
                    _pool_words(hidden[index], src_pos),
                    _pool_words(hidden[index], tgt_pos),
                ))
    for pid, source, target in records:
        if not (np.isfinite(source).all() and np.isfinite(target).all()):
            raise ExtractError(f"pair {pid!r}: non-finite embedding values")
    emb1.write(out_path, model.config.hidden_size, records)
    return len(records)


_FIXTURE = [
    ("fixture-1", ["the", "cat", "sat"], ["a", "cat", "was", "sitting"]),
    ("fixture-2", ["hello", "world"], ["greetings", "planet"]),
    ("fixture-3", ["one"], ["one", "two", "three"]),
]


def self_test(config: ExtractorConfig) -> dict:
    """Extract a builtin 3-pair fixture twice and verify the output.

    Checks shapes against token counts, finiteness, and bitwise
    determinism of the two runs. Raises ExtractError on any failure.
    """
    with tempfile.TemporaryDirectory() as workdir:
        corpus_path = os.path.join(workdir, "fixture.jsonl")
        with open(corpus_path, "w", encoding="utf-8") as fh:
            for pid, src, tgt in _FIXTURE:
                fh.write(json.dumps({"id": pid, "source": src, "target": tgt,
                                     "sure": [], "possible": []}))
                fh.write("\n")
        first = os.path.join(workdir, "a.emb1")
        second = os.path.join(workdir, "b.emb1")
        extract(corpus_path, config, first)
        extract(corpus_path, config, second)
        with open(first, "rb") as fh_a, open(second, "rb") as fh_b:
            if fh_a.read() != fh_b.read():
                raise ExtractError("two extraction runs produced different files")
        dim, entries = emb1.read(first)
        for pid, src, tgt in _FIXTURE:
            source, target = entries[pid]
            if source.shape != (len(src), dim) or target.shape != (len(tgt), dim):
                raise ExtractError(f"pair {pid!r}: unexpected shapes "
                                   f"{source.shape}, {target.shape}")
            if not (np.isfinite(source).all() and np.isfinite(target).all()):
                raise ExtractError(f"pair {pid!r}: non-finite values")
    return {"pairs": len(_FIXTURE), "dim": dim, "deterministic": True}
