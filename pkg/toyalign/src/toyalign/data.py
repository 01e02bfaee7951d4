"""JSONL corpus readers.

This package talks to the corpus producer only through its file formats:
stage-1 records (readings, channel_id, system_prompt, question, answer),
stage-2 records (window, stats, label), and the quantizer config JSON that
fixes the vocabulary id space.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterator

STAGE1_FIELDS = ("id", "channel_id", "readings", "system_prompt", "question", "answer")
STAGE2_FIELDS = ("id", "window", "stats", "label")


def iter_jsonl(path: str | Path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON record: {exc}") from exc


def _check(records: list[dict], fields: tuple[str, ...], path) -> list[dict]:
    for record in records[:1]:
        missing = [f for f in fields if f not in record]
        if missing:
            raise ValueError(f"{path}: records missing fields {missing}")
    return records


def load_stage1(path: str | Path) -> list[dict]:
    return _check(list(iter_jsonl(path)), STAGE1_FIELDS, path)


def load_stage2(path: str | Path) -> list[dict]:
    return _check(list(iter_jsonl(path)), STAGE2_FIELDS, path)


def channel_ids_of_stage1(records: list[dict]) -> list[str]:
    seen: list[str] = []
    for record in records:
        if record["channel_id"] not in seen:
            seen.append(record["channel_id"])
    return seen


def channel_count_of_stage2(records: list[dict]) -> int:
    return len(records[0]["window"])


def write_jsonl(path: str | Path, records) -> int:
    count = 0
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n")
            count += 1
    return count
