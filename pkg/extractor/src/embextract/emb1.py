"""EMB1 interchange file writer and reader.

Layout (little-endian): magic ``EMB1``, u32 version=1, u32 dim, u64 pair
count, then per pair: u16 id length, UTF-8 id bytes, u32 n, u32 m,
n*dim float32 source rows, m*dim float32 target rows.
"""

import struct

import numpy as np

MAGIC = b"EMB1"
VERSION = 1


def write(path, dim: int, records) -> None:
    """Write (id, source_matrix, target_matrix) records at 32-bit precision."""
    records = list(records)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IIQ", VERSION, dim, len(records)))
        for pid, source, target in records:
            raw = pid.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<II", source.shape[0], target.shape[0]))
            fh.write(np.ascontiguousarray(source, dtype="<f4").tobytes())
            fh.write(np.ascontiguousarray(target, dtype="<f4").tobytes())


def read(path) -> tuple[int, dict]:
    """Read an EMB1 file back; used for self-checks."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != MAGIC:
        raise ValueError(f"{path}: bad magic")
    version, dim = struct.unpack_from("<II", data, 4)
    if version != VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    (count,) = struct.unpack_from("<Q", data, 12)
    off = 20
    entries = {}
    for _ in range(count):
        (id_len,) = struct.unpack_from("<H", data, off)
        off += 2
        pid = data[off : off + id_len].decode("utf-8")
        off += id_len
        n, m = struct.unpack_from("<II", data, off)
        off += 8
        source = np.frombuffer(data, dtype="<f4", count=n * dim, offset=off).reshape(n, dim)
        off += 4 * n * dim
        target = np.frombuffer(data, dtype="<f4", count=m * dim, offset=off).reshape(m, dim)
        off += 4 * m * dim
        entries[pid] = (source, target)
    return dim, entries
