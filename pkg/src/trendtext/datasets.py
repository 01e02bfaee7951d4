"""Dataset ingestion, per-dataset configuration, downsampling, subject
splits and stage-2 window emission.

The canonical on-disk format is one CSV per subject (``<root>/<subject>.csv``)
with a header naming each channel id plus a ``label`` column holding class
names. Converters from each public archive's native layout are deliberately
out of scope; the reader is strict and reports file and line on any defect.

Five configs ship as package data with the published rates, channel
inventories, class lists, window sizes and subject splits. Downsampling is
plain decimation (keep every k-th sample from index 0, no anti-alias
filter); the choice is recorded in config metadata so a filtered variant
can be compared later.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterator

import numpy as np

from .core import ChannelStats, MultiChannelSeries, TimeSeries, channel_stats, derive_seed, window_starts

SCHEMA_VERSION = 1

SHIPPED_DATASETS = ("usc_had", "uci_har", "pamap2", "mhealth", "capture24")


class DatasetError(ValueError):
    """On-disk data violating the canonical layout; message carries file/line."""


@dataclass(frozen=True)
class DatasetConfig:
    name: str
    native_rate_hz: float
    target_rate_hz: float
    channels: tuple[tuple[str, str], ...]  # (channel_id, sensor_name)
    labels: tuple[str, ...]
    stage1_len_range: tuple[int, int]
    stage2_window: int
    stage2_stride: int
    train_subjects: tuple[str, ...]
    test_subjects: tuple[str, ...]
    subsample_fraction: float | None = None

    def __post_init__(self) -> None:
        if self.native_rate_hz <= 0 or self.target_rate_hz <= 0:
            raise ValueError("rates must be positive")
        factor = self.native_rate_hz / self.target_rate_hz
        if abs(factor - round(factor)) > 1e-9 or factor < 1:
            raise ValueError(
                f"target rate must divide native rate (integer decimation), "
                f"got {self.native_rate_hz} -> {self.target_rate_hz}"
            )
        ids = [cid for cid, _ in self.channels]
        if len(set(ids)) != len(ids):
            raise ValueError("channel ids must be unique")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("labels must be unique")
        lo, hi = self.stage1_len_range
        if not 2 <= lo <= hi:
            raise ValueError(f"bad stage1_len_range {self.stage1_len_range}")
        if self.stage2_window < 1 or self.stage2_stride < 1:
            raise ValueError("stage2 window and stride must be >= 1")
        if set(self.train_subjects) & set(self.test_subjects):
            raise ValueError("train and test subject sets overlap")
        if self.subsample_fraction is not None and not 0 < self.subsample_fraction <= 1:
            raise ValueError("subsample_fraction must be in (0, 1]")

    @property
    def decimation_factor(self) -> int:
        return round(self.native_rate_hz / self.target_rate_hz)

    @property
    def channel_ids(self) -> list[str]:
        return [cid for cid, _ in self.channels]

    @property
    def num_classes(self) -> int:
        return len(self.labels)

    def label_index(self, name: str) -> int:
        try:
            return self.labels.index(name)
        except ValueError:
            raise DatasetError(f"unknown label {name!r}; known labels: {list(self.labels)}")

    def subjects(self, split: str) -> tuple[str, ...]:
        if split == "train":
            return self.train_subjects
        if split == "test":
            return self.test_subjects
        if split == "all":
            return self.train_subjects + self.test_subjects
        raise ValueError(f"split must be train/test/all, got {split!r}")

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "native_rate_hz": self.native_rate_hz,
            "target_rate_hz": self.target_rate_hz,
            "channels": [list(c) for c in self.channels],
            "labels": list(self.labels),
            "stage1_len_range": list(self.stage1_len_range),
            "stage2_window": self.stage2_window,
            "stage2_stride": self.stage2_stride,
            "train_subjects": list(self.train_subjects),
            "test_subjects": list(self.test_subjects),
            "subsample_fraction": self.subsample_fraction,
            "downsampling": "decimation (keep every k-th sample, no anti-alias filter)",
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "DatasetConfig":
        return cls(
            name=d["name"],
            native_rate_hz=d["native_rate_hz"],
            target_rate_hz=d["target_rate_hz"],
            channels=tuple((c[0], c[1]) for c in d["channels"]),
            labels=tuple(d["labels"]),
            stage1_len_range=(d["stage1_len_range"][0], d["stage1_len_range"][1]),
            stage2_window=d["stage2_window"],
            stage2_stride=d["stage2_stride"],
            train_subjects=tuple(d["train_subjects"]),
            test_subjects=tuple(d["test_subjects"]),
            subsample_fraction=d.get("subsample_fraction"),
        )


def load_config(name_or_path: str | Path) -> DatasetConfig:
    """A shipped config by name ("mhealth") or any config JSON by path."""
    name = str(name_or_path)
    if name in SHIPPED_DATASETS:
        text = resources.files("trendtext.data.datasets").joinpath(f"{name}.json").read_text()
        return DatasetConfig.from_json_dict(json.loads(text))
    path = Path(name_or_path)
    if not path.exists():
        raise DatasetError(
            f"no shipped dataset named {name!r} (known: {list(SHIPPED_DATASETS)}) "
            f"and no config file at {path}"
        )
    return DatasetConfig.from_json_dict(json.loads(path.read_text()))


def read_subject_csv(path: Path, cfg: DatasetConfig) -> tuple[MultiChannelSeries, np.ndarray]:
    """Parse one canonical per-subject CSV at the native rate.

    Returns the multichannel series and the per-sample label indices.
    """
    if not path.exists():
        raise DatasetError(f"{path}: subject file not found")
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}:1: empty file")
        header = [h.strip() for h in header]
        col_index: dict[str, int] = {}
        for cid in cfg.channel_ids:
            if cid not in header:
                raise DatasetError(f"{path}:1: missing channel column {cid!r}")
            col_index[cid] = header.index(cid)
        if "label" not in header:
            raise DatasetError(f"{path}:1: missing 'label' column")
        label_col = header.index("label")

        columns: list[list[float]] = [[] for _ in cfg.channel_ids]
        labels: list[int] = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DatasetError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            for k, cid in enumerate(cfg.channel_ids):
                field = row[col_index[cid]]
                try:
                    columns[k].append(float(field))
                except ValueError:
                    raise DatasetError(
                        f"{path}:{lineno}: channel {cid!r} value {field!r} is not a number"
                    )
            label_name = row[label_col].strip()
            try:
                labels.append(cfg.label_index(label_name))
            except DatasetError as exc:
                raise DatasetError(f"{path}:{lineno}: {exc}")
    if not labels:
        raise DatasetError(f"{path}: no data rows")
    channels = tuple(
        TimeSeries(
            values=np.asarray(columns[k], dtype=np.float64),
            sample_rate_hz=cfg.native_rate_hz,
            sensor_name=sensor_name,
            channel_id=cid,
        )
        for k, (cid, sensor_name) in enumerate(cfg.channels)
    )
    return MultiChannelSeries(channels), np.asarray(labels, dtype=np.int64)


def decimate(series: MultiChannelSeries, factor: int) -> MultiChannelSeries:
    """Keep every ``factor``-th sample starting at index 0; rate divides."""
    if factor < 1:
        raise ValueError(f"decimation factor must be >= 1, got {factor}")
    if factor == 1:
        return series
    channels = tuple(
        TimeSeries(
            values=ch.values[::factor],
            sample_rate_hz=ch.sample_rate_hz / factor,
            sensor_name=ch.sensor_name,
            channel_id=ch.channel_id,
        )
        for ch in series.channels
    )
    return MultiChannelSeries(channels)


@dataclass(frozen=True)
class DatasetHandle:
    """Lazy per-subject access to a dataset rooted at ``root``."""

    root: Path
    config: DatasetConfig

    def subject_path(self, subject: str) -> Path:
        return self.root / f"{subject}.csv"

    def load_subject(
        self, subject: str, decimated: bool = True
    ) -> tuple[MultiChannelSeries, np.ndarray]:
        mcs, labels = read_subject_csv(self.subject_path(subject), self.config)
        if decimated:
            factor = self.config.decimation_factor
            mcs = decimate(mcs, factor)
            labels = labels[::factor]
        return mcs, labels

    def iter_subjects(
        self, split: str = "train", decimated: bool = True
    ) -> Iterator[tuple[str, MultiChannelSeries, np.ndarray]]:
        for subject in self.config.subjects(split):
            mcs, labels = self.load_subject(subject, decimated=decimated)
            yield subject, mcs, labels


def load_dataset(root: str | Path, cfg: DatasetConfig) -> DatasetHandle:
    """Bind a config to an on-disk root; subject files load lazily."""
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"dataset root {root} is not a directory")
    return DatasetHandle(root=root, config=cfg)


def majority_label(labels: np.ndarray, num_classes: int) -> int:
    """Most frequent class in a window; ties go to the earlier class index."""
    counts = np.bincount(labels, minlength=num_classes)
    return int(np.argmax(counts))


@dataclass(frozen=True)
class WindowedExample:
    """One stage-2 unit: a fixed-length multichannel window with its
    majority label and per-channel raw-value statistics."""

    window: MultiChannelSeries
    label: int
    stats: tuple[ChannelStats, ...]
    subject: str
    window_index: int
    start_index: int

    def to_record(self, cfg: DatasetConfig) -> dict:
        if not 0 <= self.label < cfg.num_classes:
            raise ValueError(f"label {self.label} outside [0, {cfg.num_classes})")
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "stage2",
            "id": f"{cfg.name}/{self.subject}/w{self.window_index}",
            "dataset": cfg.name,
            "subject": self.subject,
            "window_index": self.window_index,
            "start_index": self.start_index,
            "sample_rate_hz": self.window.sample_rate_hz,
            "label": self.label,
            "label_name": cfg.labels[self.label],
            "window": [[float(v) for v in ch.values] for ch in self.window.channels],
            "stats": [{"mean": s.mean, "variance": s.variance} for s in self.stats],
            "stats_on": "raw",
        }


def emit_stage2(
    handle: DatasetHandle,
    split: str = "train",
    subsample_seed: int | None = None,
) -> Iterator[dict]:
    """Windowed stage-2 examples as JSONL-ready dicts.

    Windows follow the config's (window, stride); the window label is the
    per-sample majority with earliest-class tie-break; per-channel stats are
    computed on the raw window values. When the config carries a
    ``subsample_fraction`` (free-living corpora too large to use whole), a
    deterministic per-subject subset of windows is kept; the seed must then
    be supplied explicitly.
    """
    cfg = handle.config
    if cfg.subsample_fraction is not None and subsample_seed is None:
        raise ValueError(
            f"dataset {cfg.name!r} subsamples windows; pass an explicit subsample_seed"
        )
    for subject, mcs, labels in handle.iter_subjects(split=split, decimated=True):
        starts = window_starts(len(mcs), cfg.stage2_window, cfg.stage2_stride)
        keep = range(len(starts))
        if cfg.subsample_fraction is not None and starts:
            rng = np.random.Generator(
                np.random.Philox(key=derive_seed(subsample_seed, cfg.name, subject))
            )
            k = max(1, round(cfg.subsample_fraction * len(starts)))
            keep = sorted(int(i) for i in rng.choice(len(starts), size=k, replace=False))
        for widx in keep:
            start = starts[widx]
            win = mcs.slice(start, cfg.stage2_window)
            example = WindowedExample(
                window=win,
                label=majority_label(labels[start : start + cfg.stage2_window], cfg.num_classes),
                stats=tuple(channel_stats(ch) for ch in win.channels),
                subject=subject,
                window_index=widx,
                start_index=start,
            )
            yield example.to_record(cfg)
