"""Fundamental time-series containers plus normalization, windowing and
random segmentation.

Everything here is a pure function over immutable inputs: instances never
mutate after construction, and the one randomized operation
(:func:`segment_randomly`) is a deterministic function of its seed, backed
by the counter-based Philox generator so corpora regenerate identically
across platforms and worker counts.

Conventions (recorded in corpus manifests as well):

* population statistics everywhere (no Bessel correction);
* constant series normalize to all zeros rather than dividing by a zero
  standard deviation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

RNG_ALGORITHM = "philox-4x64"


def _rng(seed: int) -> np.random.Generator:
    """Counter-based generator used by every randomized operation."""
    return np.random.Generator(np.random.Philox(key=seed))


def _as_readonly_array(values: Sequence[float] | np.ndarray) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"values must be one-dimensional, got shape {arr.shape}")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """A single sensor channel: readings plus sampling metadata.

    ``duration_seconds`` spans the first to the last sample, i.e.
    ``(n - 1) / sample_rate_hz``.
    """

    values: np.ndarray
    sample_rate_hz: float
    sensor_name: str = "sensor"
    channel_id: str = "ch0"

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _as_readonly_array(self.values))
        if len(self.values) == 0:
            raise ValueError("TimeSeries.values must be non-empty")
        if not self.sample_rate_hz > 0:
            raise ValueError(f"sample_rate_hz must be > 0, got {self.sample_rate_hz}")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def duration_seconds(self) -> float:
        return (len(self.values) - 1) / self.sample_rate_hz

    def slice(self, start: int, length: int) -> "TimeSeries":
        """Contiguous sub-series sharing this series' metadata."""
        if start < 0 or length < 1 or start + length > len(self.values):
            raise ValueError(
                f"slice [{start}, {start + length}) out of range for length {len(self.values)}"
            )
        return replace(self, values=self.values[start : start + length])


@dataclass(frozen=True, eq=False)
class MultiChannelSeries:
    """Channels of equal length and rate with unique channel ids."""

    channels: tuple[TimeSeries, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "channels", tuple(self.channels))
        if not self.channels:
            raise ValueError("MultiChannelSeries needs at least one channel")
        first = self.channels[0]
        for ch in self.channels[1:]:
            if len(ch) != len(first):
                raise ValueError("all channels must share the same length")
            if ch.sample_rate_hz != first.sample_rate_hz:
                raise ValueError("all channels must share the same sample rate")
        ids = [ch.channel_id for ch in self.channels]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate channel_id in {ids}")

    def __len__(self) -> int:
        return len(self.channels[0])

    @property
    def sample_rate_hz(self) -> float:
        return self.channels[0].sample_rate_hz

    @property
    def channel_ids(self) -> list[str]:
        return [ch.channel_id for ch in self.channels]

    def channel(self, channel_id: str) -> TimeSeries:
        for ch in self.channels:
            if ch.channel_id == channel_id:
                return ch
        raise KeyError(channel_id)

    def slice(self, start: int, length: int) -> "MultiChannelSeries":
        return MultiChannelSeries(tuple(ch.slice(start, length) for ch in self.channels))


@dataclass(frozen=True)
class SegmentSpec:
    """Half-open slice ``[start_index, start_index + length)`` of a parent series."""

    start_index: int
    length: int

    def __post_init__(self) -> None:
        if self.start_index < 0:
            raise ValueError(f"start_index must be >= 0, got {self.start_index}")
        if self.length < 1:
            raise ValueError(f"length must be >= 1, got {self.length}")

    @property
    def end_index(self) -> int:
        return self.start_index + self.length


@dataclass(frozen=True)
class ChannelStats:
    """Population mean and variance of one channel."""

    mean: float
    variance: float

    def __post_init__(self) -> None:
        if self.variance < 0:
            raise ValueError(f"variance must be >= 0, got {self.variance}")


def instance_normalize(series: TimeSeries) -> TimeSeries:
    """Zero-mean, unit-population-std rescaling of one series.

    Constant series (including singletons) map to all zeros: the source
    carries no shape information and dividing by a zero std is undefined.
    The exact-constant check runs before the std test because float mean
    round-off can make ``std`` of a constant series a tiny nonzero value,
    which would otherwise blow up the division.
    """
    values = series.values
    if np.all(values == values[0]):
        return replace(series, values=np.zeros_like(values))
    std = float(np.std(values))
    if std == 0.0:
        return replace(series, values=np.zeros_like(values))
    mean = float(np.mean(values))
    return replace(series, values=(values - mean) / std)


def channel_stats(series: TimeSeries) -> ChannelStats:
    """Population mean and variance of the raw values."""
    return ChannelStats(mean=float(np.mean(series.values)), variance=float(np.var(series.values)))


def segment_randomly(
    series: TimeSeries, min_len: int, max_len: int, seed: int
) -> list[SegmentSpec]:
    """Partition a prefix of ``series`` into contiguous random-length segments.

    Lengths are drawn uniformly from ``[min_len, min(max_len, remaining)]``
    so every draw fits; the loop stops once fewer than ``min_len`` samples
    remain, dropping that tail. Identical ``(len(series), min_len, max_len,
    seed)`` always produce identical output.
    """
    n = len(series)
    if not (1 <= min_len <= max_len):
        raise ValueError(f"need 1 <= min_len <= max_len, got [{min_len}, {max_len}]")
    if max_len > n:
        raise ValueError(f"max_len {max_len} exceeds series length {n}")
    rng = _rng(seed)
    segments: list[SegmentSpec] = []
    cursor = 0
    while n - cursor >= min_len:
        high = min(max_len, n - cursor)
        length = int(rng.integers(min_len, high + 1))
        segments.append(SegmentSpec(cursor, length))
        cursor += length
    return segments


def window_starts(length: int, window_len: int, stride: int) -> list[int]:
    """Start indices of every full window: 0, stride, 2*stride, ..."""
    if window_len < 1:
        raise ValueError(f"window_len must be >= 1, got {window_len}")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    if window_len > length:
        return []
    count = (length - window_len) // stride + 1
    return [i * stride for i in range(count)]


def window(
    series: MultiChannelSeries, window_len: int, stride: int
) -> list[MultiChannelSeries]:
    """Overlapping fixed-length windows; only full windows are emitted.

    A ``window_len`` longer than the series yields an empty list, not an
    error: a short recording simply contributes no examples.
    """
    return [series.slice(start, window_len) for start in window_starts(len(series), window_len, stride)]


def derive_seed(master_seed: int, *parts: object) -> int:
    """Stable per-task sub-seed: sha256 over the master seed and key parts.

    Never uses Python's salted ``hash``; the result is identical across
    processes and platforms, which is what makes fan-out over (subject,
    channel) workers order-independent.
    """
    import hashlib

    payload = "\x1f".join([str(master_seed), *[str(p) for p in parts]]).encode("utf-8")
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")
