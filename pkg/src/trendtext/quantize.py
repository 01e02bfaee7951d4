"""Scaling and bin quantization of a series into discrete tokens.

A series is first divided by the mean of its absolute values
(:func:`mean_scale`), then each scaled value is mapped to a bin id in
``[1, B]`` by ordered bin edges: values below the first edge get token 1,
values in ``[b_{k-1}, b_k)`` get token k, and values at or above the last
edge get token B. A value exactly on an edge falls into the higher bin
(half-open intervals). An end-of-sequence token is appended; a pad token
id is reserved for batching. Dequantization maps bin ids back to bin
centers and multiplies by the stored scale.

The default configuration uses 4094 uniform centers on [-15, 15] with
edges at midpoints, pad id 0 and eos id 4095, so the full vocabulary is
4096 ids. Configs serialize to JSON so token corpora stay self-describing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .core import TimeSeries


class TokenError(ValueError):
    """A token id outside the configured vocabulary."""


@dataclass(frozen=True, eq=False)
class QuantizerConfig:
    bin_centers: np.ndarray
    bin_edges: np.ndarray
    pad_token_id: int
    eos_token_id: int
    config_id: str

    def __post_init__(self) -> None:
        centers = np.asarray(self.bin_centers, dtype=np.float64)
        edges = np.asarray(self.bin_edges, dtype=np.float64)
        object.__setattr__(self, "bin_centers", centers)
        object.__setattr__(self, "bin_edges", edges)
        b = len(centers)
        if b < 2:
            raise ValueError("need at least 2 bin centers")
        if len(edges) != b - 1:
            raise ValueError(f"need {b - 1} edges for {b} centers, got {len(edges)}")
        if not np.all(np.diff(centers) > 0):
            raise ValueError("bin_centers must be strictly ascending")
        if not np.all(np.diff(edges) > 0):
            raise ValueError("bin_edges must be strictly ascending")
        # Edges must separate centers: c_i < b_i < c_{i+1}.
        if not (np.all(centers[:-1] < edges) and np.all(edges < centers[1:])):
            raise ValueError("each edge must lie strictly between its neighboring centers")
        for name, tok in (("pad_token_id", self.pad_token_id), ("eos_token_id", self.eos_token_id)):
            if 1 <= tok <= b:
                raise ValueError(f"{name}={tok} collides with data token range [1, {b}]")
        if self.pad_token_id == self.eos_token_id:
            raise ValueError("pad and eos token ids must differ")

    @property
    def num_bins(self) -> int:
        return len(self.bin_centers)

    @property
    def max_center_gap(self) -> float:
        return float(np.max(np.diff(self.bin_centers)))

    def to_json_dict(self) -> dict:
        d: dict = {
            "config_id": self.config_id,
            "num_bins": self.num_bins,
            "pad_token_id": self.pad_token_id,
            "eos_token_id": self.eos_token_id,
        }
        if self._uniform_params is not None:
            low, high = self._uniform_params
            d["rule"] = {"kind": "uniform", "low": low, "high": high}
        else:
            d["rule"] = {
                "kind": "explicit",
                "bin_centers": self.bin_centers.tolist(),
                "bin_edges": self.bin_edges.tolist(),
            }
        return d

    @property
    def _uniform_params(self) -> tuple[float, float] | None:
        """(low, high) when the centers are an even grid with midpoint edges."""
        centers = self.bin_centers
        gaps = np.diff(centers)
        if not np.allclose(gaps, gaps[0], rtol=0, atol=1e-12):
            return None
        mids = (centers[:-1] + centers[1:]) / 2
        if not np.allclose(self.bin_edges, mids, rtol=0, atol=1e-12):
            return None
        return float(centers[0]), float(centers[-1])

    @classmethod
    def from_json_dict(cls, d: dict) -> "QuantizerConfig":
        rule = d["rule"]
        if rule["kind"] == "uniform":
            return uniform_config(
                num_bins=d["num_bins"],
                low=rule["low"],
                high=rule["high"],
                pad_token_id=d["pad_token_id"],
                eos_token_id=d["eos_token_id"],
                config_id=d.get("config_id"),
            )
        if rule["kind"] == "explicit":
            return cls(
                bin_centers=np.asarray(rule["bin_centers"], dtype=np.float64),
                bin_edges=np.asarray(rule["bin_edges"], dtype=np.float64),
                pad_token_id=d["pad_token_id"],
                eos_token_id=d["eos_token_id"],
                config_id=d["config_id"],
            )
        raise ValueError(f"unknown quantizer rule kind {rule['kind']!r}")

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "QuantizerConfig":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def uniform_config(
    num_bins: int = 4094,
    low: float = -15.0,
    high: float = 15.0,
    pad_token_id: int = 0,
    eos_token_id: int | None = None,
    config_id: str | None = None,
) -> QuantizerConfig:
    """Uniform bin centers on [low, high] with edges at midpoints."""
    centers = np.linspace(low, high, num_bins)
    edges = (centers[:-1] + centers[1:]) / 2
    if eos_token_id is None:
        eos_token_id = num_bins + 1
    if config_id is None:
        config_id = f"uniform-b{num_bins}-{format(low, 'g')}-{format(high, 'g')}"
    return QuantizerConfig(
        bin_centers=centers,
        bin_edges=edges,
        pad_token_id=pad_token_id,
        eos_token_id=eos_token_id,
        config_id=config_id,
    )


def default_config() -> QuantizerConfig:
    return uniform_config()


@dataclass(frozen=True)
class TokenSequence:
    """Quantized series: data tokens in [1, B], one trailing eos, plus the
    mean-abs scale needed to reconstruct magnitudes."""

    token_ids: tuple[int, ...]
    scale: float
    config_id: str
    sample_rate_hz: float = 1.0
    sensor_name: str = "sensor"
    channel_id: str = "ch0"

    def __post_init__(self) -> None:
        object.__setattr__(self, "token_ids", tuple(int(t) for t in self.token_ids))
        if not self.scale > 0:
            raise ValueError(f"scale must be > 0, got {self.scale}")

    def data_token_ids(self, cfg: QuantizerConfig) -> list[int]:
        """Token ids with pad/eos stripped; rejects out-of-vocabulary ids."""
        specials = {cfg.pad_token_id, cfg.eos_token_id}
        out = []
        eos_seen = False
        for pos, tok in enumerate(self.token_ids):
            if tok == cfg.eos_token_id:
                if eos_seen:
                    raise TokenError("multiple eos tokens in sequence")
                if pos != len(self.token_ids) - 1:
                    raise TokenError(f"eos token at position {pos} is not final")
                eos_seen = True
                continue
            if tok == cfg.pad_token_id:
                continue
            if not (1 <= tok <= cfg.num_bins):
                raise TokenError(f"token id {tok} outside vocabulary [1, {cfg.num_bins}]")
            out.append(tok)
        return out


def mean_scale(series: TimeSeries) -> tuple[TimeSeries, float]:
    """Divide by the mean absolute value; all-zero series use scale 1.

    Returns the scaled series and the scale so the original magnitudes are
    recoverable after dequantization.
    """
    scale = float(np.mean(np.abs(series.values)))
    if scale == 0.0:
        return series, 1.0
    return replace(series, values=series.values / scale), scale


def quantize(series: TimeSeries, cfg: QuantizerConfig, scale: float = 1.0) -> TokenSequence:
    """Bin-assign an already mean-scaled series and append eos.

    ``scale`` is carried into the output sequence verbatim; pass the value
    returned by :func:`mean_scale`.
    """
    # side="right" realizes the half-open convention: a value equal to an
    # edge counts that edge as passed and lands in the higher bin.
    ids = np.searchsorted(cfg.bin_edges, series.values, side="right") + 1
    tokens = tuple(int(t) for t in ids) + (cfg.eos_token_id,)
    return TokenSequence(
        token_ids=tokens,
        scale=scale,
        config_id=cfg.config_id,
        sample_rate_hz=series.sample_rate_hz,
        sensor_name=series.sensor_name,
        channel_id=series.channel_id,
    )


def tokenize_series(series: TimeSeries, cfg: QuantizerConfig) -> TokenSequence:
    """mean_scale followed by quantize: the full front-end in one call."""
    scaled, scale = mean_scale(series)
    return quantize(scaled, cfg, scale=scale)


def dequantize_values(tokens: TokenSequence, cfg: QuantizerConfig) -> np.ndarray:
    """Map data tokens back to bin centers times the stored scale.

    Pad and eos tokens are dropped; a sequence of specials only yields an
    empty array.
    """
    if tokens.config_id != cfg.config_id:
        raise TokenError(
            f"sequence was produced under config {tokens.config_id!r}, not {cfg.config_id!r}"
        )
    data = tokens.data_token_ids(cfg)
    if not data:
        return np.empty(0, dtype=np.float64)
    return cfg.bin_centers[np.asarray(data, dtype=np.int64) - 1] * tokens.scale


def dequantize(tokens: TokenSequence, cfg: QuantizerConfig) -> TimeSeries:
    """:func:`dequantize_values` wrapped back into a TimeSeries.

    Raises on a sequence with no data tokens, because the series container
    cannot be empty; use :func:`dequantize_values` when that case matters.
    """
    values = dequantize_values(tokens, cfg)
    if len(values) == 0:
        raise TokenError("sequence contains no data tokens")
    return TimeSeries(
        values=values,
        sample_rate_hz=tokens.sample_rate_hz,
        sensor_name=tokens.sensor_name,
        channel_id=tokens.channel_id,
    )
