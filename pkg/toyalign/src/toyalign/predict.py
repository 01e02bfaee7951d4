"""Prediction emitters: the output side of the cross-package contract.

Stage-2 predictions are {id, pred_label} records; stage-1 generations are
{id, generated_text}. Both shapes are what the corpus producer's metrics
and verify commands consume.
"""

from __future__ import annotations

import torch

from .assemble import assemble_stage1_input, assemble_stage2_input, stage2_logits
from .model import ClassifierHead, MultimodalToyModel


def predict_stage2(
    model: MultimodalToyModel, head: ClassifierHead, records: list[dict], batch_size: int = 16
) -> list[dict]:
    out: list[dict] = []
    with torch.no_grad():
        for i in range(0, len(records), batch_size):
            chunk_records = records[i : i + batch_size]
            items = [assemble_stage2_input(model, r) for r in chunk_records]
            pred = stage2_logits(model, head, items).argmax(dim=-1)
            for record, label in zip(chunk_records, pred.tolist()):
                out.append({"id": record["id"], "pred_label": int(label)})
    return out


def generate_stage1(
    model: MultimodalToyModel, record: dict, max_new_tokens: int = 400
) -> dict:
    """Greedy decoding of an answer conditioned on the sensor block and the
    prompt; stops at eos or the token budget."""
    prompt = dict(record, answer="")
    item = assemble_stage1_input(model, prompt)
    # Drop the trailing eos the (empty) answer contributed.
    embeddings = item.embeddings[:-1]
    generated: list[int] = []
    with torch.no_grad():
        for _ in range(max_new_tokens):
            hidden = model.lm.hidden_states(embeddings.unsqueeze(0))
            logits = model.logits(hidden[0, -1])
            next_id = int(logits.argmax())
            if next_id == model.vocab.eos_id:
                break
            generated.append(next_id)
            embeddings = torch.cat(
                [embeddings, model.embed_ids(torch.tensor([next_id]))], dim=0
            )
            if embeddings.shape[0] >= model.cfg.max_len:
                break
    return {"id": record["id"], "generated_text": model.vocab.decode(generated)}
