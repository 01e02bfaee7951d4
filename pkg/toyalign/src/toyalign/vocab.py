"""Text codec over the quantizer vocabulary id space.

The companion pipeline serializes its quantizer config as JSON
({num_bins, pad_token_id, eos_token_id, ...}); that file defines the base
id space V = num_bins + 2 this trainer reuses for text. UTF-8 bytes map to
ids 1..256 (inside the data-token range), pad and eos keep their ids, and
per-channel start/end tokens extend the vocabulary to V' = V + 2C.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class TextVocab:
    num_bins: int = 4094
    pad_id: int = 0
    eos_id: int = 4095

    def __post_init__(self) -> None:
        if self.num_bins < 256:
            raise ValueError("vocabulary too small to hold byte ids 1..256")
        for name, tok in (("pad_id", self.pad_id), ("eos_id", self.eos_id)):
            if 1 <= tok <= self.num_bins:
                raise ValueError(f"{name}={tok} collides with data id range")

    @property
    def size(self) -> int:
        """Base vocabulary size V: ids 0 .. max(special) inclusive."""
        return max(self.num_bins, self.pad_id, self.eos_id) + 1

    @classmethod
    def from_quantizer_json(cls, path: str | Path) -> "TextVocab":
        d = json.loads(Path(path).read_text())
        return cls(
            num_bins=d["num_bins"],
            pad_id=d["pad_token_id"],
            eos_id=d["eos_token_id"],
        )

    def encode(self, text: str) -> list[int]:
        return [1 + b for b in text.encode("utf-8")]

    def decode(self, ids: list[int]) -> str:
        data = bytes(i - 1 for i in ids if 1 <= i <= 256)
        return data.decode("utf-8", errors="replace")


@dataclass(frozen=True)
class SpecialTokenTable:
    """Start/end token ids per channel, appended after the base vocabulary.

    Channel i gets ids (V + 2i, V + 2i + 1); the embedding rows behind them
    are trainable while base rows stay frozen.
    """

    base_size: int
    channel_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.channel_ids)) != len(self.channel_ids):
            raise ValueError("duplicate channel ids")
        if not self.channel_ids:
            raise ValueError("at least one channel must be registered")

    @property
    def num_rows(self) -> int:
        return 2 * len(self.channel_ids)

    @property
    def extended_size(self) -> int:
        return self.base_size + self.num_rows

    def ids(self, channel_id: str) -> tuple[int, int]:
        try:
            i = self.channel_ids.index(channel_id)
        except ValueError:
            raise KeyError(f"channel {channel_id!r} has no registered special tokens")
        return self.base_size + 2 * i, self.base_size + 2 * i + 1
