"""Sequence assembly and the two training losses.

Stage 1 (alignment): one sensor block — start token, aligned encoder rows
for the l readings plus the encoder's end-of-series row, end token, so
l + 3 rows — concatenated with instruction, question and answer token
embeddings. The generative loss is mean negative log-likelihood over
answer positions only.

Stage 2 (tuning): one block per channel in channel order, then the
embedded statistics prompt (mean/variance per channel, fixed two-decimal
text, the convention shared with the corpus producer), giving
C * (l + 3) + n_stat_tokens rows. The final hidden state feeds the
classifier head under softmax cross-entropy.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch

from .model import ClassifierHead, MultimodalToyModel


def normalize_segment(values: torch.Tensor) -> torch.Tensor:
    """Zero-mean unit-std; constant segments map to zeros (shared convention
    with the corpus producer, which also uses population statistics)."""
    if torch.all(values == values[0]):
        return torch.zeros_like(values)
    std = values.std(unbiased=False)
    if std == 0:
        return torch.zeros_like(values)
    return (values - values.mean()) / std


def stats_prompt_text(channel_ids: list[str], stats: list[dict]) -> str:
    """Per-channel mean/variance rendered as fixed two-decimal text."""
    parts = [
        f"{cid}: mean={s['mean']:.2f}, variance={s['variance']:.2f}"
        for cid, s in zip(channel_ids, stats)
    ]
    return "statistics: " + "; ".join(parts) + "."


@dataclass
class Stage1Item:
    embeddings: torch.Tensor  # (k, D)
    targets: torch.Tensor     # (k,) int64; only positions under the mask matter
    loss_mask: torch.Tensor   # (k,) bool; True where the NEXT token is an answer token
    sensor_rows: int
    record_id: str = ""


def assemble_stage1_input(model: MultimodalToyModel, record: dict) -> Stage1Item:
    """Build the full embedded sequence and answer-only loss mask for one
    stage-1 corpus record."""
    dtype = model.lm.embed.weight.dtype
    values = torch.as_tensor(record["readings"], dtype=dtype)
    block = model.sensor_block(values, record["channel_id"])

    vocab = model.vocab
    instruction_ids = vocab.encode(record["system_prompt"])
    question_ids = vocab.encode(record["question"])
    answer_ids = vocab.encode(record["answer"]) + [vocab.eos_id]
    text_ids = torch.as_tensor(instruction_ids + question_ids + answer_ids, dtype=torch.long)

    embeddings = torch.cat([block, model.embed_ids(text_ids)], dim=0)
    k = embeddings.shape[0]

    answer_start = block.shape[0] + len(instruction_ids) + len(question_ids)
    targets = torch.zeros(k, dtype=torch.long)
    targets[block.shape[0] : k] = text_ids
    loss_mask = torch.zeros(k, dtype=torch.bool)
    # Position p predicts token p+1; train only where p+1 is an answer token.
    loss_mask[answer_start - 1 : k - 1] = True

    return Stage1Item(
        embeddings=embeddings,
        targets=targets,
        loss_mask=loss_mask,
        sensor_rows=block.shape[0],
        record_id=record.get("id", ""),
    )


def _pad_batch(items: list[torch.Tensor]) -> torch.Tensor:
    k = max(t.shape[0] for t in items)
    out = items[0].new_zeros((len(items), k, items[0].shape[1]))
    for i, t in enumerate(items):
        out[i, : t.shape[0]] = t
    return out


def stage1_loss(model: MultimodalToyModel, items: list[Stage1Item]) -> torch.Tensor:
    """Mean NLL over answer positions across the batch.

    Prompt and sensor positions are masked out; an empty mask is a caller
    bug (nothing to learn from) and raises.
    """
    if not items:
        raise ValueError("empty batch")
    if not any(item.loss_mask.any() for item in items):
        raise ValueError("loss mask selects no positions")
    embeddings = _pad_batch([item.embeddings for item in items])
    hidden = model.lm.hidden_states(embeddings)
    logits = model.logits(hidden)

    total = embeddings.new_zeros(())
    count = 0
    for i, item in enumerate(items):
        mask = item.loss_mask
        if not mask.any():
            continue
        # Shifted one left: logits at p score the token at p+1.
        pred = logits[i, : item.embeddings.shape[0]][mask]
        target = item.targets.roll(-1)[mask]
        total = total + torch.nn.functional.cross_entropy(pred, target, reduction="sum")
        count += int(mask.sum())
    return total / count


@dataclass
class Stage2Item:
    embeddings: torch.Tensor  # (rows, D)
    label: int
    sensor_rows: int
    stat_rows: int
    record_id: str = ""


def assemble_stage2_input(model: MultimodalToyModel, record: dict) -> Stage2Item:
    """Per-channel aligned blocks in channel order plus the statistics
    prompt embeddings for one stage-2 window record."""
    dtype = model.lm.embed.weight.dtype
    window = record["window"]
    channel_ids = list(model.specials.channel_ids)
    if len(window) != len(channel_ids):
        raise ValueError(
            f"record has {len(window)} channels, model registered {len(channel_ids)}"
        )
    blocks = []
    for cid, values in zip(channel_ids, window):
        segment = normalize_segment(torch.as_tensor(values, dtype=dtype))
        blocks.append(model.sensor_block(segment, cid))
    sensor = torch.cat(blocks, dim=0)

    if model.cfg.use_stats_prompt:
        text = stats_prompt_text(channel_ids, record["stats"])
        ids = torch.as_tensor(model.vocab.encode(text), dtype=torch.long)
        stats_emb = model.embed_ids(ids)
    else:
        stats_emb = sensor.new_zeros((0, sensor.shape[1]))

    return Stage2Item(
        embeddings=torch.cat([sensor, stats_emb], dim=0),
        label=int(record["label"]),
        sensor_rows=sensor.shape[0],
        stat_rows=stats_emb.shape[0],
        record_id=record.get("id", ""),
    )


def stage2_loss(
    model: MultimodalToyModel, head: ClassifierHead, items: list[Stage2Item]
) -> torch.Tensor:
    """Softmax cross-entropy on the classifier over the final hidden state."""
    if not items:
        raise ValueError("empty batch")
    for item in items:
        if not 0 <= item.label < head.num_classes:
            raise ValueError(f"label {item.label} outside [0, {head.num_classes})")
    embeddings = _pad_batch([item.embeddings for item in items])
    hidden = model.lm.hidden_states(embeddings)
    # Causal masking makes the last real row the summary of the sequence.
    last = torch.stack(
        [hidden[i, item.embeddings.shape[0] - 1] for i, item in enumerate(items)]
    )
    logits = head(last)
    labels = torch.as_tensor([item.label for item in items], dtype=torch.long)
    return torch.nn.functional.cross_entropy(logits, labels)


def stage2_logits(
    model: MultimodalToyModel, head: ClassifierHead, items: list[Stage2Item]
) -> torch.Tensor:
    embeddings = _pad_batch([item.embeddings for item in items])
    hidden = model.lm.hidden_states(embeddings)
    last = torch.stack(
        [hidden[i, item.embeddings.shape[0] - 1] for i, item in enumerate(items)]
    )
    return head(last)
