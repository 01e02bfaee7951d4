"""CLI: train the two stages over JSONL corpora and emit predictions.

    toyalign stage1  --corpus corpus.jsonl --out ckpt.pt [--quantizer q.json]
    toyalign stage2  --windows windows.jsonl --ckpt ckpt.pt --out tuned.pt
    toyalign predict --windows windows.jsonl --ckpt tuned.pt --out preds.jsonl
    toyalign generate --corpus corpus.jsonl --ckpt ckpt.pt --out gens.jsonl

Prediction files feed straight into the corpus producer's metrics/verify
commands.
"""

from __future__ import annotations

import argparse
import sys

import torch

from .data import (
    channel_count_of_stage2,
    channel_ids_of_stage1,
    load_stage1,
    load_stage2,
    write_jsonl,
)
from .model import ClassifierHead, MultimodalToyModel, ToyConfig
from .predict import generate_stage1, predict_stage2
from .train import (
    frozen_fingerprint,
    load_alignment_into,
    load_checkpoint,
    model_from_checkpoint,
    pretrain_lm,
    save_checkpoint,
    train_accuracy,
    train_stage1,
    train_stage2,
)
from .vocab import TextVocab


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toyalign")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("stage1", help="alignment training on a stage-1 corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--quantizer", help="quantizer config JSON fixing the vocabulary")
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--pretrain-steps", type=int, default=300)
    p.add_argument("--grad-accum", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-special-tokens", action="store_true")
    p.add_argument("--align-hidden", type=int, nargs="*", default=[],
                   help="extra hidden widths for the alignment MLP depth ablation")

    p = sub.add_parser("stage2", help="task tuning on stage-2 windows")
    p.add_argument("--windows", required=True)
    p.add_argument("--ckpt", required=True, help="stage-1 checkpoint")
    p.add_argument("--out", required=True)
    p.add_argument("--num-classes", type=int, required=True)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--grad-accum", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-stats-prompt", action="store_true")

    p = sub.add_parser("predict", help="emit {id, pred_label} for stage-2 windows")
    p.add_argument("--windows", required=True)
    p.add_argument("--ckpt", required=True, help="stage-2 checkpoint")
    p.add_argument("--out", required=True)

    p = sub.add_parser("generate", help="emit {id, generated_text} for stage-1 prompts")
    p.add_argument("--corpus", required=True)
    p.add_argument("--ckpt", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--limit", type=int, default=10)
    p.add_argument("--max-new-tokens", type=int, default=400)

    return parser


def cmd_stage1(args) -> int:
    torch.manual_seed(args.seed)
    records = load_stage1(args.corpus)
    vocab = TextVocab.from_quantizer_json(args.quantizer) if args.quantizer else TextVocab()
    cfg = ToyConfig(
        use_special_tokens=not args.no_special_tokens,
        align_hidden=tuple(args.align_hidden),
        grad_accum=args.grad_accum,
    )
    model = MultimodalToyModel(vocab, channel_ids_of_stage1(records), cfg, seed=args.seed)
    pre_loss = pretrain_lm(model, records, steps=args.pretrain_steps, seed=args.seed)
    print(f"pretrained frozen LM stand-in; final batch loss {pre_loss:.3f}")
    before = frozen_fingerprint(model)
    trace = train_stage1(model, records, steps=args.steps, seed=args.seed)
    assert frozen_fingerprint(model) == before, "frozen-parameter audit failed"
    print(f"stage-1 corpus loss {trace.initial_loss:.3f} -> {trace.final_loss:.3f} "
          f"over {args.steps} steps (vocab {model.extended_vocab_size})")
    save_checkpoint(args.out, model, extra={"stage": 1, "corpus": args.corpus})
    print(f"checkpoint written to {args.out}")
    return 0


def cmd_stage2(args) -> int:
    torch.manual_seed(args.seed)
    records = load_stage2(args.windows)
    payload = load_checkpoint(args.ckpt)
    model = model_from_checkpoint(payload)
    if args.no_stats_prompt:
        model.cfg = ToyConfig.from_json_dict({**model.cfg.to_json_dict(), "use_stats_prompt": False})
    if channel_count_of_stage2(records) != len(model.specials.channel_ids):
        # Cross-dataset run: fresh special rows for this dataset's channels,
        # keeping the trained alignment module.
        first = records[0]
        channel_ids = [f"ch{i}" for i in range(len(first["window"]))]
        fresh = MultimodalToyModel(model.vocab, channel_ids, model.cfg, seed=args.seed)
        fresh.lm.load_state_dict(model.lm.state_dict())
        fresh.encoder.load_state_dict(model.encoder.state_dict())
        load_alignment_into(fresh, payload)
        model = fresh
    head = ClassifierHead(model.cfg.embed_dim, args.num_classes, seed=args.seed)
    before = frozen_fingerprint(model)
    trace = train_stage2(model, head, records, steps=args.steps, seed=args.seed,
                         grad_accum=args.grad_accum)
    assert frozen_fingerprint(model) == before, "frozen-parameter audit failed"
    acc = train_accuracy(model, head, records)
    print(f"stage-2 loss {trace.initial_loss:.3f} -> {trace.final_loss:.3f}; "
          f"train accuracy {acc:.3f}")
    save_checkpoint(args.out, model, head=head, extra={"stage": 2, "windows": args.windows})
    print(f"checkpoint written to {args.out}")
    return 0


def cmd_predict(args) -> int:
    records = load_stage2(args.windows)
    payload = load_checkpoint(args.ckpt)
    if "classifier" not in payload:
        print("error: checkpoint has no classifier head (run stage2 first)", file=sys.stderr)
        return 1
    model = model_from_checkpoint(payload)
    head = ClassifierHead(model.cfg.embed_dim, payload["num_classes"])
    head.load_state_dict(payload["classifier"])
    count = write_jsonl(args.out, predict_stage2(model, head, records))
    print(f"wrote {count} predictions to {args.out}")
    return 0


def cmd_generate(args) -> int:
    records = load_stage1(args.corpus)[: args.limit]
    model = model_from_checkpoint(load_checkpoint(args.ckpt))
    count = write_jsonl(
        args.out,
        (generate_stage1(model, r, max_new_tokens=args.max_new_tokens) for r in records),
    )
    print(f"wrote {count} generations to {args.out}")
    return 0


_HANDLERS = {
    "stage1": cmd_stage1,
    "stage2": cmd_stage2,
    "predict": cmd_predict,
    "generate": cmd_generate,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.subcommand](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
