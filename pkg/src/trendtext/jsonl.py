"""Streaming JSONL I/O with a canonical serialization.

Records are written with sorted keys and compact separators so that a
rerun of any deterministic pipeline stage is byte-identical. Readers are
generators; nothing here assumes an input fits in memory.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import IO, Iterable, Iterator


def dump_canonical(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def write_jsonl(path: str | Path, records: Iterable[dict]) -> int:
    """Stream records to ``path``; returns the number written."""
    count = 0
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for record in records:
            f.write(dump_canonical(record))
            f.write("\n")
            count += 1
    return count


def iter_jsonl(source: str | Path | IO[str]) -> Iterator[dict]:
    if hasattr(source, "read"):
        yield from _iter_handle(source, "<stream>")
        return
    with open(source, encoding="utf-8") as f:
        yield from _iter_handle(f, str(source))


def _iter_handle(handle: IO[str], name: str) -> Iterator[dict]:
    for lineno, line in enumerate(handle, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            yield json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{name}:{lineno}: invalid JSON record: {exc}") from exc


def read_jsonl(path: str | Path) -> list[dict]:
    return list(iter_jsonl(path))
