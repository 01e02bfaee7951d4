"""Model components: frozen series encoder, alignment MLP, tiny frozen
causal LM with trainable per-channel token rows, and a classifier head.

Only the alignment MLP, the special-token embedding rows and the
classifier head are ever trainable; the LM base and the series encoder
stay frozen through both training stages (the audit in train.py hashes
them before and after).
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from .vocab import SpecialTokenTable, TextVocab


@dataclass(frozen=True)
class ToyConfig:
    d_ts: int = 16           # series-encoder output width
    d_m: int = 32            # alignment hidden width
    embed_dim: int = 64      # LM embedding width D
    align_hidden: tuple[int, ...] = ()  # extra hidden widths beyond d_m (depth ablation)
    n_layers: int = 2
    n_heads: int = 2
    max_len: int = 768
    use_special_tokens: bool = True
    use_stats_prompt: bool = True
    # Optimizer defaults; tests shrink grad_accum for speed.
    lr: float = 2e-3
    batch_size: int = 4
    grad_accum: int = 8

    def to_json_dict(self) -> dict:
        return {
            "d_ts": self.d_ts, "d_m": self.d_m, "embed_dim": self.embed_dim,
            "align_hidden": list(self.align_hidden), "n_layers": self.n_layers,
            "n_heads": self.n_heads, "max_len": self.max_len,
            "use_special_tokens": self.use_special_tokens,
            "use_stats_prompt": self.use_stats_prompt,
            "lr": self.lr, "batch_size": self.batch_size, "grad_accum": self.grad_accum,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "ToyConfig":
        d = dict(d)
        d["align_hidden"] = tuple(d.get("align_hidden", ()))
        return cls(**d)


class FrozenSeriesEncoder(nn.Module):
    """Random conv features standing in for a pretrained series embedder.

    Maps a normalized segment of length l to (l + 1, d_ts): per-position
    features from the value and its local differences, plus one trailing
    end-of-series row, mirroring the extra token a real tokenizing encoder
    appends.
    """

    def __init__(self, d_ts: int, seed: int = 0):
        super().__init__()
        gen = torch.Generator().manual_seed(seed)
        self.conv1 = nn.Conv1d(2, d_ts, kernel_size=3, padding=1)
        self.conv2 = nn.Conv1d(d_ts, d_ts, kernel_size=3, padding=1)
        with torch.no_grad():
            for p in self.parameters():
                p.copy_(torch.randn(p.shape, generator=gen) * 0.4)
        self.register_buffer("eos_row", torch.randn(d_ts, generator=gen) * 0.4)
        for p in self.parameters():
            p.requires_grad_(False)

    def forward(self, values: torch.Tensor) -> torch.Tensor:
        if values.ndim != 1:
            raise ValueError(f"encoder expects a 1-d series, got shape {tuple(values.shape)}")
        diffs = torch.zeros_like(values)
        if len(values) > 1:
            diffs[1:] = values[1:] - values[:-1]
        x = torch.stack([values, diffs]).unsqueeze(0)  # (1, 2, l)
        h = torch.nn.functional.gelu(self.conv1(x))
        h = self.conv2(h).squeeze(0).transpose(0, 1)  # (l, d_ts)
        return torch.cat([h, self.eos_row.to(h.dtype).unsqueeze(0)], dim=0)


class AlignmentModule(nn.Module):
    """Row-wise MLP from encoder space to the LM embedding space.

    One hidden layer by default: out = W2 @ gelu(W1 @ x + b1) + b2. Extra
    hidden widths (depth ablation) insert further gelu layers between.
    """

    def __init__(self, d_ts: int, d_m: int, embed_dim: int, hidden: tuple[int, ...] = ()):
        super().__init__()
        widths = [d_ts, d_m, *hidden, embed_dim]
        self.layers = nn.ModuleList(
            nn.Linear(widths[i], widths[i + 1]) for i in range(len(widths) - 1)
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        for layer in self.layers[:-1]:
            x = torch.nn.functional.gelu(layer(x))
        return self.layers[-1](x)


class Block(nn.Module):
    def __init__(self, embed_dim: int, n_heads: int):
        super().__init__()
        self.ln1 = nn.LayerNorm(embed_dim)
        self.attn = nn.MultiheadAttention(embed_dim, n_heads, batch_first=True)
        self.ln2 = nn.LayerNorm(embed_dim)
        self.mlp = nn.Sequential(
            nn.Linear(embed_dim, 4 * embed_dim),
            nn.GELU(),
            nn.Linear(4 * embed_dim, embed_dim),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        k = x.shape[1]
        mask = torch.triu(
            torch.full((k, k), float("-inf"), dtype=x.dtype, device=x.device), diagonal=1
        )
        h = self.ln1(x)
        attn_out, _ = self.attn(h, h, h, attn_mask=mask, need_weights=False)
        x = x + attn_out
        return x + self.mlp(self.ln2(x))


class TinyCausalLM(nn.Module):
    """Small causal transformer over the base vocabulary.

    The output head is tied to the embedding matrix; hidden states map to
    logits over the extended vocabulary via the concatenation of the frozen
    base rows and the trainable special rows owned by the wrapper model.
    """

    def __init__(self, vocab_size: int, cfg: ToyConfig, seed: int = 0):
        super().__init__()
        torch.manual_seed(seed)
        self.embed = nn.Embedding(vocab_size, cfg.embed_dim)
        self.pos = nn.Embedding(cfg.max_len, cfg.embed_dim)
        self.blocks = nn.ModuleList(Block(cfg.embed_dim, cfg.n_heads) for _ in range(cfg.n_layers))
        self.ln_f = nn.LayerNorm(cfg.embed_dim)
        nn.init.normal_(self.embed.weight, std=0.05)
        nn.init.normal_(self.pos.weight, std=0.02)

    def hidden_states(self, embeddings: torch.Tensor) -> torch.Tensor:
        """(batch, k, D) embeddings -> (batch, k, D) causal hidden states."""
        k = embeddings.shape[1]
        if k > self.pos.num_embeddings:
            raise ValueError(f"sequence length {k} exceeds max_len {self.pos.num_embeddings}")
        positions = torch.arange(k, device=embeddings.device)
        x = embeddings + self.pos(positions).to(embeddings.dtype)
        for block in self.blocks:
            x = block(x)
        return self.ln_f(x)


class MultimodalToyModel(nn.Module):
    """Sensor blocks + text embeddings through a frozen LM.

    Composition of the frozen pieces (series encoder, LM base) and the
    trainable ones (alignment MLP, special-token rows). The classifier head
    for the tuning stage lives outside (see ClassifierHead) so the
    alignment checkpoint stays dataset-portable.
    """

    def __init__(
        self,
        vocab: TextVocab,
        channel_ids: list[str],
        cfg: ToyConfig,
        seed: int = 0,
    ):
        super().__init__()
        self.vocab = vocab
        self.cfg = cfg
        self.encoder = FrozenSeriesEncoder(cfg.d_ts, seed=seed)
        self.align = AlignmentModule(cfg.d_ts, cfg.d_m, cfg.embed_dim, cfg.align_hidden)
        self.lm = TinyCausalLM(vocab.size, cfg, seed=seed + 1)
        self.specials = SpecialTokenTable(vocab.size, tuple(channel_ids))
        torch.manual_seed(seed + 2)
        self.special_rows = nn.Parameter(torch.randn(self.specials.num_rows, cfg.embed_dim) * 0.05)

    # ----- vocabulary ------------------------------------------------------

    @property
    def extended_vocab_size(self) -> int:
        if self.cfg.use_special_tokens:
            return self.specials.extended_size
        return self.vocab.size

    def full_embedding_matrix(self) -> torch.Tensor:
        if self.cfg.use_special_tokens:
            return torch.cat([self.lm.embed.weight, self.special_rows], dim=0)
        return self.lm.embed.weight

    def embed_ids(self, ids: torch.Tensor) -> torch.Tensor:
        return self.full_embedding_matrix()[ids]

    def logits(self, hidden: torch.Tensor) -> torch.Tensor:
        return hidden @ self.full_embedding_matrix().t()

    # ----- sensor side ------------------------------------------------------

    def sensor_block(self, values: torch.Tensor, channel_id: str) -> torch.Tensor:
        """Aligned rows for one segment: (l + 3, D) with special tokens on,
        (l + 1, D) with them off."""
        aligned = self.align(self.encoder(values))
        if not self.cfg.use_special_tokens:
            return aligned
        start_id, end_id = self.specials.ids(channel_id)
        matrix = self.full_embedding_matrix()
        return torch.cat(
            [matrix[start_id].unsqueeze(0), aligned, matrix[end_id].unsqueeze(0)], dim=0
        )

    # ----- parameter groups --------------------------------------------------

    def trainable_parameters(self) -> list[nn.Parameter]:
        return [*self.align.parameters(), self.special_rows]

    def frozen_modules(self) -> list[nn.Module]:
        return [self.encoder, self.lm]


class ClassifierHead(nn.Module):
    """Fully connected layer from the final hidden state to class logits."""

    def __init__(self, embed_dim: int, num_classes: int, seed: int = 0):
        super().__init__()
        torch.manual_seed(seed)
        self.fc = nn.Linear(embed_dim, num_classes)

    def forward(self, h: torch.Tensor) -> torch.Tensor:
        return self.fc(h)

    @property
    def num_classes(self) -> int:
        return self.fc.out_features
