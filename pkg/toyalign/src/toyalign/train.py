"""Training loops, frozen-parameter audit, and checkpoints.

The LM stand-in is briefly pretrained on the assembled sequences (with the
alignment MLP held at its random init) and then frozen, mirroring a
pretrained-then-frozen backbone. The audited stages afterwards optimize
only the alignment MLP, the special-token rows, and (stage 2) the
classifier head, with AdamW at the configured learning rate.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import torch

from .assemble import (
    Stage1Item,
    assemble_stage1_input,
    assemble_stage2_input,
    stage1_loss,
    stage2_logits,
    stage2_loss,
)
from .model import ClassifierHead, MultimodalToyModel, ToyConfig
from .vocab import TextVocab


def frozen_fingerprint(model: MultimodalToyModel) -> str:
    """sha256 over every frozen tensor (LM base + series encoder)."""
    digest = hashlib.sha256()
    for module in model.frozen_modules():
        for name, tensor in sorted(module.state_dict().items()):
            digest.update(name.encode())
            digest.update(tensor.detach().cpu().numpy().tobytes())
    return digest.hexdigest()


def trainable_fingerprint(model: MultimodalToyModel) -> str:
    digest = hashlib.sha256()
    for tensor in model.trainable_parameters():
        digest.update(tensor.detach().cpu().numpy().tobytes())
    return digest.hexdigest()


def _batches(items: list, batch_size: int, steps: int, seed: int):
    gen = torch.Generator().manual_seed(seed)
    for _ in range(steps):
        idx = torch.randint(0, len(items), (min(batch_size, len(items)),), generator=gen)
        yield [items[i] for i in idx.tolist()]


def pretrain_lm(
    model: MultimodalToyModel,
    records: list[dict],
    steps: int = 300,
    batch_size: int = 8,
    lr: float = 1e-3,
    seed: int = 0,
) -> float:
    """Language-model the assembled sequences before freezing the backbone.

    All LM-base parameters train here (the alignment MLP and special rows do
    not), so the later audited stages start from a frozen model that already
    speaks the answer templates. Returns the final batch loss.
    """
    for p in model.lm.parameters():
        p.requires_grad_(True)
    opt = torch.optim.AdamW(model.lm.parameters(), lr=lr)
    loss = torch.tensor(float("nan"))
    for batch in _batches(records, batch_size, steps, seed):
        opt.zero_grad()
        # Assemble fresh each step so the input side tracks the updating
        # embedding table; sensor rows are detached (the alignment module is
        # deliberately left at its init during pretraining).
        items = []
        for record in batch:
            item = assemble_stage1_input(model, record)
            emb = torch.cat(
                [item.embeddings[: item.sensor_rows].detach(),
                 item.embeddings[item.sensor_rows :]]
            )
            items.append(
                Stage1Item(
                    embeddings=emb,
                    targets=item.targets,
                    loss_mask=item.loss_mask,
                    sensor_rows=item.sensor_rows,
                    record_id=item.record_id,
                )
            )
        loss = stage1_loss(model, items)
        loss.backward()
        opt.step()
    for p in model.lm.parameters():
        p.requires_grad_(False)
    return float(loss.detach())


def corpus_stage1_loss(model: MultimodalToyModel, records: list[dict]) -> float:
    """Full-corpus evaluation loss (no grad), in modest chunks."""
    with torch.no_grad():
        total, count = 0.0, 0
        for i in range(0, len(records), 8):
            chunk = [assemble_stage1_input(model, r) for r in records[i : i + 8]]
            n = sum(int(item.loss_mask.sum()) for item in chunk)
            total += float(stage1_loss(model, chunk)) * n
            count += n
    return total / count


@dataclass
class StageTrace:
    initial_loss: float
    final_loss: float
    losses: list[float]


def train_stage1(
    model: MultimodalToyModel,
    records: list[dict],
    steps: int = 500,
    seed: int = 0,
    grad_accum: int | None = None,
) -> StageTrace:
    """Alignment stage: only the alignment MLP and special rows learn."""
    cfg = model.cfg
    accum = cfg.grad_accum if grad_accum is None else grad_accum
    for module in model.frozen_modules():
        for p in module.parameters():
            p.requires_grad_(False)
    params = model.trainable_parameters()
    opt = torch.optim.AdamW(params, lr=cfg.lr)
    initial = corpus_stage1_loss(model, records)
    losses = []
    gen = torch.Generator().manual_seed(seed)
    for _ in range(steps):
        opt.zero_grad()
        for _ in range(accum):
            idx = torch.randint(0, len(records), (min(cfg.batch_size, len(records)),), generator=gen)
            items = [assemble_stage1_input(model, records[i]) for i in idx.tolist()]
            loss = stage1_loss(model, items) / accum
            loss.backward()
        opt.step()
        losses.append(float(loss.detach()) * accum)
    return StageTrace(initial_loss=initial, final_loss=corpus_stage1_loss(model, records), losses=losses)


def train_stage2(
    model: MultimodalToyModel,
    head: ClassifierHead,
    records: list[dict],
    steps: int = 500,
    seed: int = 0,
    grad_accum: int | None = None,
) -> StageTrace:
    """Tuning stage: alignment MLP, special rows and classifier head learn."""
    cfg = model.cfg
    accum = cfg.grad_accum if grad_accum is None else grad_accum
    for module in model.frozen_modules():
        for p in module.parameters():
            p.requires_grad_(False)
    params = [*model.trainable_parameters(), *head.parameters()]
    opt = torch.optim.AdamW(params, lr=cfg.lr)
    items_all = [assemble_stage2_input(model, r) for r in records]
    with torch.no_grad():
        initial = float(stage2_loss(model, head, items_all))
    losses = []
    gen = torch.Generator().manual_seed(seed)
    for _ in range(steps):
        opt.zero_grad()
        for _ in range(accum):
            idx = torch.randint(0, len(records), (min(cfg.batch_size, len(records)),), generator=gen)
            items = [assemble_stage2_input(model, records[i]) for i in idx.tolist()]
            loss = stage2_loss(model, head, items) / accum
            loss.backward()
        opt.step()
        losses.append(float(loss.detach()) * accum)
        if losses[-1] < 1e-3:
            break
    items_all = [assemble_stage2_input(model, r) for r in records]
    with torch.no_grad():
        final = float(stage2_loss(model, head, items_all))
    return StageTrace(initial_loss=initial, final_loss=final, losses=losses)


def train_accuracy(
    model: MultimodalToyModel, head: ClassifierHead, records: list[dict]
) -> float:
    with torch.no_grad():
        correct = 0
        for i in range(0, len(records), 16):
            chunk = [assemble_stage2_input(model, r) for r in records[i : i + 16]]
            logits = stage2_logits(model, head, chunk)
            pred = logits.argmax(dim=-1)
            correct += int(sum(int(p) == item.label for p, item in zip(pred, chunk)))
    return correct / len(records)


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

def save_checkpoint(
    path: str | Path,
    model: MultimodalToyModel,
    head: ClassifierHead | None = None,
    extra: dict | None = None,
) -> None:
    payload = {
        "config": model.cfg.to_json_dict(),
        "vocab": {
            "num_bins": model.vocab.num_bins,
            "pad_id": model.vocab.pad_id,
            "eos_id": model.vocab.eos_id,
        },
        "channel_ids": list(model.specials.channel_ids),
        "align": model.align.state_dict(),
        "special_rows": model.special_rows.detach(),
        "lm": model.lm.state_dict(),
        "encoder": model.encoder.state_dict(),
        "frozen_fingerprint": frozen_fingerprint(model),
        "extra": extra or {},
    }
    if head is not None:
        payload["classifier"] = head.state_dict()
        payload["num_classes"] = head.num_classes
    torch.save(payload, path)


def load_checkpoint(path: str | Path) -> dict:
    return torch.load(path, weights_only=False)


def model_from_checkpoint(payload: dict) -> MultimodalToyModel:
    cfg = ToyConfig.from_json_dict(payload["config"])
    vocab = TextVocab(
        num_bins=payload["vocab"]["num_bins"],
        pad_id=payload["vocab"]["pad_id"],
        eos_id=payload["vocab"]["eos_id"],
    )
    model = MultimodalToyModel(vocab, payload["channel_ids"], cfg)
    model.lm.load_state_dict(payload["lm"])
    model.encoder.load_state_dict(payload["encoder"])
    model.align.load_state_dict(payload["align"])
    with torch.no_grad():
        model.special_rows.copy_(payload["special_rows"])
    return model


def load_alignment_into(model: MultimodalToyModel, payload: dict) -> None:
    """Plug a trained alignment module into another dataset's model.

    Works whenever the encoder/embedding widths match; channel-specific
    special rows stay with the target model.
    """
    model.align.load_state_dict(payload["align"])
