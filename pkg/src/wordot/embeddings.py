"""EMB1 interchange file IO and corpus mean centring.

EMB1 layout (little-endian): magic ``EMB1``, u32 version=1, u32 dim,
u64 pair count, then per pair: u16 id length, UTF-8 id bytes, u32 n,
u32 m, n*dim float32 (source rows), m*dim float32 (target rows).
Values are promoted to float64 on load; all arithmetic downstream is
64-bit.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .corpus import AlignedCorpus
from .errors import DataError

MAGIC = b"EMB1"
VERSION = 1


@dataclass(frozen=True)
class EmbeddingTable:
    """Per-pair (source, target) embedding matrices keyed by pair id."""

    dim: int
    entries: dict[str, tuple[np.ndarray, np.ndarray]]

    def __len__(self) -> int:
        return len(self.entries)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.off = 0

    def take(self, count: int) -> bytes:
        if self.off + count > len(self.data):
            raise DataError("truncated record")
        chunk = self.data[self.off : self.off + count]
        self.off += count
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load_embeddings(path) -> EmbeddingTable:
    """Read an EMB1 file, validating shapes and finiteness."""
    with open(path, "rb") as fh:
        reader = _Reader(fh.read())
    if reader.take(4) != MAGIC:
        raise DataError(f"{path}: bad magic, not an EMB1 file")
    (version,) = reader.unpack("<I")
    if version != VERSION:
        raise DataError(f"{path}: unsupported version {version}")
    (dim,) = reader.unpack("<I")
    if dim < 1:
        raise DataError(f"{path}: dimension must be positive, got {dim}")
    (count,) = reader.unpack("<Q")

    entries: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    for _ in range(count):
        (id_len,) = reader.unpack("<H")
        pid = reader.take(id_len).decode("utf-8")
        n, m = reader.unpack("<II")
        if n < 1 or m < 1:
            raise DataError(f"{path}: pair {pid!r}: empty matrix (n={n}, m={m})")
        source = np.frombuffer(reader.take(4 * n * dim), dtype="<f4")
        target = np.frombuffer(reader.take(4 * m * dim), dtype="<f4")
        source = source.astype(np.float64).reshape(n, dim)
        target = target.astype(np.float64).reshape(m, dim)
        if not (np.isfinite(source).all() and np.isfinite(target).all()):
            raise DataError(f"{path}: non-finite value in pair {pid!r}")
        if pid in entries:
            raise DataError(f"{path}: duplicate pair id {pid!r}")
        entries[pid] = (source, target)
    if reader.off != len(reader.data):
        raise DataError(f"{path}: trailing bytes after last record")
    return EmbeddingTable(dim=dim, entries=entries)


def write_embeddings(table: EmbeddingTable, path) -> None:
    """Write an EMB1 file (values stored at 32-bit precision)."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IIQ", VERSION, table.dim, len(table.entries)))
        for pid, (source, target) in table.entries.items():
            raw = pid.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<II", source.shape[0], target.shape[0]))
            fh.write(np.ascontiguousarray(source, dtype="<f4").tobytes())
            fh.write(np.ascontiguousarray(target, dtype="<f4").tobytes())


def corpus_mean_center(table: EmbeddingTable) -> EmbeddingTable:
    """Subtract the mean vector over all words of all pairs, both sides."""
    if not table.entries:
        raise DataError("cannot centre an empty embedding table")
    total = np.zeros(table.dim)
    count = 0
    for source, target in table.entries.values():
        total += source.sum(axis=0) + target.sum(axis=0)
        count += source.shape[0] + target.shape[0]
    mean = total / count
    entries = {
        pid: (source - mean, target - mean)
        for pid, (source, target) in table.entries.items()
    }
    return EmbeddingTable(dim=table.dim, entries=entries)


def validate_against(table: EmbeddingTable, corpus: AlignedCorpus) -> None:
    """Check every corpus pair has a table entry with matching lengths."""
    for pair, _ in corpus.pairs:
        if pair.id not in table.entries:
            raise DataError(f"embedding table is missing pair id {pair.id!r}")
        source, target = table.entries[pair.id]
        if source.shape[0] != pair.n:
            raise DataError(
                f"pair {pair.id!r}: source has {source.shape[0]} rows, "
                f"sentence has {pair.n} tokens"
            )
        if target.shape[0] != pair.m:
            raise DataError(
                f"pair {pair.id!r}: target has {target.shape[0]} rows, "
                f"sentence has {pair.m} tokens"
            )
