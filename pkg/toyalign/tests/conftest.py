"""Shared fixtures: toy corpora forged through the companion CLI.

Everything this package consumes is produced by invoking the installed
``trendtext`` command as a subprocess, exactly as a user would, so these
tests double as a contract check on the JSONL schemas.
"""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

# A compact template bank keeps toy sequences short (the training stand-in
# is byte-level); the bank file format is the supported extension point.
COMPACT_BANK = {
    "system_prompt": "Sensor QA: {N} points at {sample_rate}Hz.",
    "question_trend": ["Trends in the {data}?"],
    "question_summary": ["Summary of the {data}?"],
    "answer_segment_line": ["{start_time}-{end_time}s: {trend}"],
    "answer_trend_count": ["Count of {trend} trends: {num}"],
    "answer_context": ["The {data_name} spans {start_time}s to {end_time}s."],
    "answer_change_stats": ["{trend_num} trends, {change_num} trend changes."],
    "answer_cumulative": [
        {
            "first": "In total, a {trend_type} trend over {total_time} seconds",
            "rest": [", and a {trend_type} trend over {total_time} seconds"],
        }
    ],
    "answer_overall": ["The overall trend is {overall_trend}."],
    "synonyms": [{"growing": "growing", "declining": "declining", "stable": "stable"}],
}


def run_trendtext(*argv) -> None:
    result = subprocess.run(
        [sys.executable, "-m", "trendtext", *[str(a) for a in argv]],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0, f"trendtext {argv} failed:\n{result.stderr}\n{result.stdout}"


def read_jsonl(path: Path) -> list[dict]:
    return [json.loads(line) for line in path.read_text().splitlines() if line.strip()]


def _smooth_signal(n: int, freq: float, amplitude: float, phase: float = 0.0) -> np.ndarray:
    t = np.arange(n) / 50.0
    return amplitude * np.sin(2 * np.pi * freq * t + phase)


@pytest.fixture(scope="session")
def workspace(tmp_path_factory) -> Path:
    """On-disk toy datasets plus forged corpora (one subprocess run each)."""
    base = tmp_path_factory.mktemp("toyalign_ws")
    bank_path = base / "bank.json"
    bank_path.write_text(json.dumps(COMPACT_BANK))

    # --- single-channel dataset for the alignment stage -------------------
    s1_root = base / "s1_data"
    s1_root.mkdir()
    rows = ["wrist_acc_x,label"]
    signal = _smooth_signal(900, freq=0.35, amplitude=2.0) + _smooth_signal(900, 0.05, 0.5)
    for v in signal:
        rows.append(f"{v:.4f},Moving")
    (s1_root / "s1.csv").write_text("\n".join(rows) + "\n")
    s1_cfg = {
        "name": "toys1", "native_rate_hz": 50.0, "target_rate_hz": 50.0,
        "channels": [["wrist_acc_x", "wrist x-axis accelerometer"]],
        "labels": ["Moving"], "stage1_len_range": [8, 14],
        "stage2_window": 12, "stage2_stride": 6,
        "train_subjects": ["s1"], "test_subjects": [], "subsample_fraction": None,
    }
    s1_cfg_path = base / "toys1.json"
    s1_cfg_path.write_text(json.dumps(s1_cfg))

    corpus_path = base / "stage1_corpus.jsonl"
    run_trendtext("forge-stage1", "--config", s1_cfg_path, "--data-root", s1_root,
                  "--seed", 5, "--bank", bank_path, "--out", corpus_path)

    tokens_path = base / "tokens.jsonl"
    run_trendtext("tokenize", "--in", corpus_path, "--out", tokens_path)
    quantizer_path = base / "tokens.jsonl.quantizer.json"

    # --- two-channel, three-class dataset for the tuning stage ------------
    s2_root = base / "s2_data"
    s2_root.mkdir()
    rows = ["wrist_acc_x,wrist_acc_y,label"]
    rng = np.random.default_rng(0)
    blocks = [
        ("Slow", _smooth_signal(120, 0.3, 1.0), _smooth_signal(120, 0.3, 1.0, 1.0)),
        ("Fast", _smooth_signal(120, 2.0, 3.0), _smooth_signal(120, 2.5, 3.0, 0.5)),
        ("Ramp", np.linspace(-2, 2, 120) + rng.normal(0, 0.05, 120), np.linspace(2, -2, 120)),
    ]
    for label, a, b in blocks:
        for x, y in zip(a, b):
            rows.append(f"{x:.4f},{y:.4f},{label}")
    (s2_root / "p1.csv").write_text("\n".join(rows) + "\n")
    s2_cfg = {
        "name": "toys2", "native_rate_hz": 50.0, "target_rate_hz": 50.0,
        "channels": [["wrist_acc_x", "wrist x-axis accelerometer"],
                     ["wrist_acc_y", "wrist y-axis accelerometer"]],
        "labels": ["Slow", "Fast", "Ramp"], "stage1_len_range": [8, 14],
        "stage2_window": 12, "stage2_stride": 6,
        "train_subjects": ["p1"], "test_subjects": [], "subsample_fraction": None,
    }
    s2_cfg_path = base / "toys2.json"
    s2_cfg_path.write_text(json.dumps(s2_cfg))

    windows_path = base / "stage2_windows.jsonl"
    run_trendtext("emit-stage2", "--config", s2_cfg_path, "--data-root", s2_root,
                  "--out", windows_path)

    return base


@pytest.fixture(scope="session")
def stage1_records(workspace) -> list[dict]:
    records = read_jsonl(workspace / "stage1_corpus.jsonl")
    assert len(records) >= 50, f"toy corpus too small: {len(records)}"
    return records[:50]


@pytest.fixture(scope="session")
def stage2_records(workspace) -> list[dict]:
    records = read_jsonl(workspace / "stage2_windows.jsonl")
    by_label: dict[int, list[dict]] = {}
    for record in records:
        by_label.setdefault(record["label"], []).append(record)
    assert set(by_label) == {0, 1, 2}, sorted(by_label)
    picked = []
    for label in (0, 1, 2):
        picked.extend(by_label[label][:10])
    assert len(picked) == 30
    return picked


@pytest.fixture(scope="session")
def quantizer_json(workspace) -> Path:
    return workspace / "tokens.jsonl.quantizer.json"
