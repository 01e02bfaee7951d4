"""Deterministic trend segmentation of a single-channel series.

A series of n readings yields n-1 deltas; each delta is classified as
growing / declining / stable against a threshold ``epsilon`` (default 0:
any increase is growing, any decrease declining, exact repeats stable).
Maximal runs of equal classifications merge into :class:`TrendSegment`
spans, and the full :class:`TrendReport` carries the counts, cumulative
durations, number of distinct kinds, change count (= number of segments)
and the overall trend (sign of last reading minus first; ties are stable).

Time stamps are ``index / sample_rate_hz`` seconds. For rendering into
text, :func:`format_seconds` rounds to two decimals and trims a trailing
zero while always keeping at least one decimal ("0.3", "0.62", "0.0").
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping

import numpy as np

from .core import TimeSeries


class TrendKind(str, Enum):
    GROWING = "growing"
    DECLINING = "declining"
    STABLE = "stable"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


# Canonical ordering used only for deterministic tie-breaks.
_KIND_ORDER = {TrendKind.GROWING: 0, TrendKind.DECLINING: 1, TrendKind.STABLE: 2}


@dataclass(frozen=True)
class TrendSegment:
    """Inclusive index span ``[start_index, end_index]`` with one trend kind."""

    kind: TrendKind
    start_index: int
    end_index: int
    start_time_s: float
    end_time_s: float

    def __post_init__(self) -> None:
        if not self.start_index < self.end_index:
            raise ValueError(
                f"segment needs start_index < end_index, got [{self.start_index}, {self.end_index}]"
            )

    @property
    def duration_s(self) -> float:
        return self.end_time_s - self.start_time_s


@dataclass(frozen=True)
class TrendReport:
    """Complete segmentation result for one window of readings.

    ``segments`` tile ``[0, n_points - 1]`` with no gaps and no two adjacent
    segments of the same kind. ``counts`` and ``cumulative_seconds`` are
    keyed by kind in order of first appearance, which is also the order the
    text renderer lists them in.
    """

    segments: tuple[TrendSegment, ...]
    counts: Mapping[TrendKind, int]
    cumulative_seconds: Mapping[TrendKind, float]
    num_distinct_kinds: int
    change_count: int
    overall: TrendKind
    n_points: int
    sample_rate_hz: float

    @property
    def start_time_s(self) -> float:
        return self.segments[0].start_time_s

    @property
    def end_time_s(self) -> float:
        return self.segments[-1].end_time_s

    def to_json_dict(self) -> dict:
        return {
            "segments": [
                {
                    "kind": seg.kind.value,
                    "start_index": seg.start_index,
                    "end_index": seg.end_index,
                    "start_time_s": seg.start_time_s,
                    "end_time_s": seg.end_time_s,
                }
                for seg in self.segments
            ],
            "counts": {k.value: v for k, v in self.counts.items()},
            "cumulative_seconds": {k.value: v for k, v in self.cumulative_seconds.items()},
            "num_distinct_kinds": self.num_distinct_kinds,
            "change_count": self.change_count,
            "overall": self.overall.value,
            "n_points": self.n_points,
            "sample_rate_hz": self.sample_rate_hz,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "TrendReport":
        segments = tuple(
            TrendSegment(
                kind=TrendKind(s["kind"]),
                start_index=s["start_index"],
                end_index=s["end_index"],
                start_time_s=s["start_time_s"],
                end_time_s=s["end_time_s"],
            )
            for s in d["segments"]
        )
        return cls(
            segments=segments,
            counts={TrendKind(k): v for k, v in d["counts"].items()},
            cumulative_seconds={TrendKind(k): v for k, v in d["cumulative_seconds"].items()},
            num_distinct_kinds=d["num_distinct_kinds"],
            change_count=d["change_count"],
            overall=TrendKind(d["overall"]),
            n_points=d["n_points"],
            sample_rate_hz=d["sample_rate_hz"],
        )


def classify_deltas(series: TimeSeries, epsilon: float = 0.0) -> list[TrendKind]:
    """One kind per adjacent reading pair.

    Growing when the step exceeds ``epsilon``, declining when it falls below
    ``-epsilon``, stable otherwise. ``epsilon`` exists because real sensors
    jitter; the default 0 matches exact-sign classification.
    """
    if len(series) < 2:
        raise ValueError("need at least 2 readings to classify deltas")
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    deltas = np.diff(series.values)
    kinds: list[TrendKind] = []
    for d in deltas:
        if d > epsilon:
            kinds.append(TrendKind.GROWING)
        elif d < -epsilon:
            kinds.append(TrendKind.DECLINING)
        else:
            kinds.append(TrendKind.STABLE)
    return kinds


def overall_trend(series: TimeSeries) -> TrendKind:
    """Sign of (last reading - first reading); ties are stable.

    Deliberately not the longest-cumulative-duration kind: a window can be
    mostly flat yet end lower than it started, and the net movement is what
    the overall line reports.
    """
    first = float(series.values[0])
    last = float(series.values[-1])
    if last > first:
        return TrendKind.GROWING
    if last < first:
        return TrendKind.DECLINING
    return TrendKind.STABLE


def segment_trends(series: TimeSeries, epsilon: float = 0.0) -> TrendReport:
    """Merge maximal runs of equal delta kinds into a full trend report."""
    kinds = classify_deltas(series, epsilon)
    rate = series.sample_rate_hz

    segments: list[TrendSegment] = []
    run_start = 0
    for i in range(1, len(kinds) + 1):
        if i == len(kinds) or kinds[i] != kinds[run_start]:
            # Deltas [run_start, i) cover readings [run_start, i].
            segments.append(
                TrendSegment(
                    kind=kinds[run_start],
                    start_index=run_start,
                    end_index=i,
                    start_time_s=run_start / rate,
                    end_time_s=i / rate,
                )
            )
            run_start = i

    counts: dict[TrendKind, int] = {}
    step_totals: dict[TrendKind, int] = {}
    for seg in segments:
        counts[seg.kind] = counts.get(seg.kind, 0) + 1
        step_totals[seg.kind] = step_totals.get(seg.kind, 0) + (seg.end_index - seg.start_index)
    # Integer step totals divided once per kind keep the per-kind sums exact
    # enough that they reconcile with (n-1)/rate to ~1 ulp.
    cumulative = {kind: steps / rate for kind, steps in step_totals.items()}

    return TrendReport(
        segments=tuple(segments),
        counts=counts,
        cumulative_seconds=cumulative,
        num_distinct_kinds=len(counts),
        change_count=len(segments),
        overall=overall_trend(series),
        n_points=len(series),
        sample_rate_hz=rate,
    )


def kinds_by_duration(report: TrendReport) -> list[TrendKind]:
    """Kinds present, descending cumulative duration, stable tie-break."""
    return sorted(
        report.cumulative_seconds,
        key=lambda k: (-report.cumulative_seconds[k], _KIND_ORDER[k]),
    )


def format_seconds(x: float) -> str:
    """Two-decimal rounding with the trailing zero trimmed, min one decimal.

    0.0 -> "0.0", 0.3 -> "0.3", 0.62 -> "0.62", 10.0 -> "10.0".
    """
    s = f"{x:.2f}"
    s = s.rstrip("0")
    if s.endswith("."):
        s += "0"
    return s


def format_hz(rate: float) -> str:
    """Sample rates render without a decimal when integral: "50", "12.5"."""
    if rate == int(rate):
        return str(int(rate))
    return f"{rate:g}"
