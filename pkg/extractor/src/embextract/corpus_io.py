"""Minimal reader for the canonical JSON-lines corpus format.

Only `id`, `source` and `target` are needed here; gold link fields are
ignored.
"""

import json


class CorpusError(Exception):
    pass


def read_pairs(path) -> list[tuple[str, list[str], list[str]]]:
    pairs = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                pid = str(obj["id"])
                source = [str(t) for t in obj["source"]]
                target = [str(t) for t in obj["target"]]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorpusError(f"{path}:{lineno}: bad corpus line: {exc}") from exc
            if not source or not target or any(not t for t in source + target):
                raise CorpusError(f"{path}:{lineno}: empty sentence or token")
            if pid in seen:
                raise CorpusError(f"{path}:{lineno}: duplicate pair id {pid!r}")
            seen.add(pid)
            pairs.append((pid, source, target))
    return pairs
