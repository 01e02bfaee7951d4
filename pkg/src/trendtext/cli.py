"""Command-line entry point wiring the pipeline stages together.

Subcommands: forge-stage1, emit-stage2, tokenize, metrics, verify, judge,
report. Every subcommand accepts --seed, --config and --out, streams JSONL
record by record, and writes a run manifest next to each output artifact
(``<out>.manifest.json``) carrying everything needed to regenerate it;
``--from-manifest`` reruns a generation stage from such a manifest and the
regenerated artifact is byte-identical.

Exit codes: 0 success, 1 runtime failure (one ``error: ...`` line on
stderr), 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Iterable, Iterator

from . import __version__
from .core import RNG_ALGORITHM, TimeSeries
from .datasets import DatasetError, emit_stage2, load_config, load_dataset
from .forge import ForgeOptions, forge_corpus
from .jsonl import dump_canonical, iter_jsonl, write_jsonl
from .judge import (
    CassetteTransport,
    HttpTransport,
    JudgeConfig,
    JudgeError,
    judge_many,
)
from .metrics import classification_report, score_text_pairs
from .quantize import QuantizerConfig, default_config, tokenize_series
from .templates import TemplateBank
from .trends import TrendReport
from .verifier import verify_trend_text

MANIFEST_SCHEMA_VERSION = 1


class CliError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# manifests
# ---------------------------------------------------------------------------

def manifest_path(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.json")


def write_manifest(out: Path, subcommand: str, params: dict, inputs: list[str]) -> None:
    manifest = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "tool": "trendtext",
        "tool_version": __version__,
        "subcommand": subcommand,
        "created_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "params": params,
        "inputs": inputs,
        "output": str(out),
        "conventions": {
            "rng_algorithm": RNG_ALGORITHM,
            "statistics": "population (no Bessel correction)",
            "time_format": "seconds, 2 decimals, trailing zero trimmed, min 1 decimal",
        },
    }
    manifest_path(out).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def load_manifest_params(path: str) -> tuple[str, dict]:
    manifest = json.loads(Path(path).read_text())
    return manifest["subcommand"], manifest["params"]


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    parser.add_argument("--config", help="dataset name or config JSON path")
    parser.add_argument("--out", help="output path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trendtext",
        description="sensor time-series: trend QA corpora, token sequences, "
        "windowed datasets and their evaluation battery",
    )
    parser.add_argument("--version", action="version", version=f"trendtext {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("forge-stage1", help="generate the trend-QA alignment corpus")
    _add_common(p)
    p.add_argument("--data-root", help="dataset root directory (env TRENDTEXT_DATA_ROOT)")
    p.add_argument("--split", default="train", choices=["train", "test", "all"])
    p.add_argument("--bank", help="template bank JSON (default: shipped bank)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--question-mix", type=float, default=0.5,
                   help="probability a question is trend-style rather than summary-style")
    p.add_argument("--no-normalize", action="store_true",
                   help="describe raw rather than instance-normalized readings")
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--min-len", type=int)
    p.add_argument("--max-len", type=int)
    p.add_argument("--from-manifest", help="rerun with the parameters of a previous run")

    p = sub.add_parser("emit-stage2", help="emit windowed classification examples")
    _add_common(p)
    p.add_argument("--data-root", help="dataset root directory (env TRENDTEXT_DATA_ROOT)")
    p.add_argument("--split", default="train", choices=["train", "test", "all"])
    p.add_argument("--from-manifest", help="rerun with the parameters of a previous run")

    p = sub.add_parser("tokenize", help="quantize corpus readings into token sequences")
    _add_common(p)
    p.add_argument("--in", dest="input", help="stage-1 corpus JSONL")
    p.add_argument("--quantizer", help="quantizer config JSON (default: uniform 4094 bins)")
    p.add_argument("--from-manifest", help="rerun with the parameters of a previous run")

    p = sub.add_parser("metrics", help="score predictions against references")
    _add_common(p)
    p.add_argument("--pred", required=True, help="predictions JSONL")
    p.add_argument("--truth", required=True, help="reference corpus JSONL")
    p.add_argument("--task", default="auto", choices=["auto", "text", "classification"])

    p = sub.add_parser("verify", help="rule-based check of trend descriptions")
    _add_common(p)
    p.add_argument("--truth", required=True, help="stage-1 corpus JSONL with reports")
    p.add_argument("--pred", help="predictions JSONL; omitted = corpus self-check")

    p = sub.add_parser("judge", help="score descriptions with a remote chat model")
    _add_common(p)
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--cassette", help="replay recorded responses; no network needed")
    p.add_argument("--endpoint")
    p.add_argument("--model")
    p.add_argument("--api-key-env")
    p.add_argument("--max-retries", type=int)
    p.add_argument("--timeout", type=float)

    p = sub.add_parser("report", help="render a metrics JSON as an aligned x100 table")
    _add_common(p)
    p.add_argument("--in", dest="input", required=True, help="metrics report JSON")

    return parser


def _resolve_data_root(args) -> Path:
    import os

    root = getattr(args, "data_root", None) or os.environ.get("TRENDTEXT_DATA_ROOT")
    if not root:
        raise CliError("no dataset root: pass --data-root or set TRENDTEXT_DATA_ROOT")
    return Path(root)


def _require(args, name: str) -> str:
    value = getattr(args, name, None)
    if not value:
        raise CliError(f"--{name.replace('_', '-')} is required for this subcommand")
    return value


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_forge_stage1(args) -> int:
    if args.from_manifest:
        subcommand, params = load_manifest_params(args.from_manifest)
        if subcommand != "forge-stage1":
            raise CliError(f"manifest is for {subcommand!r}, not forge-stage1")
        out = Path(args.out) if args.out else Path(params["out"])
        params = dict(params, out=str(out))
    else:
        params = {
            "config": _require(args, "config"),
            "data_root": str(_resolve_data_root(args)),
            "seed": args.seed,
            "split": args.split,
            "bank": args.bank,
            "workers": args.workers,
            "question_mix": args.question_mix,
            "normalize": not args.no_normalize,
            "epsilon": args.epsilon,
            "min_len": args.min_len,
            "max_len": args.max_len,
            "out": _require(args, "out"),
        }
        out = Path(params["out"])

    cfg = load_config(params["config"])
    handle = load_dataset(params["data_root"], cfg)
    bank = TemplateBank.from_json_file(params["bank"]) if params["bank"] else TemplateBank.default()
    options = ForgeOptions(
        question_mix_trend=params["question_mix"],
        normalize=params["normalize"],
        epsilon=params["epsilon"],
        min_len=params["min_len"],
        max_len=params["max_len"],
    )
    count = write_jsonl(
        out,
        forge_corpus(
            handle,
            options,
            seed=params["seed"],
            bank=bank,
            split=params["split"],
            workers=params["workers"],
        ),
    )
    write_manifest(out, "forge-stage1", params, inputs=[params["data_root"]])
    print(f"wrote {count} stage-1 records to {out}")
    return 0


def cmd_emit_stage2(args) -> int:
    if args.from_manifest:
        subcommand, params = load_manifest_params(args.from_manifest)
        if subcommand != "emit-stage2":
            raise CliError(f"manifest is for {subcommand!r}, not emit-stage2")
        out = Path(args.out) if args.out else Path(params["out"])
        params = dict(params, out=str(out))
    else:
        params = {
            "config": _require(args, "config"),
            "data_root": str(_resolve_data_root(args)),
            "seed": args.seed,
            "split": args.split,
            "out": _require(args, "out"),
        }
        out = Path(params["out"])

    cfg = load_config(params["config"])
    handle = load_dataset(params["data_root"], cfg)
    subsample_seed = params["seed"] if cfg.subsample_fraction is not None else None
    count = write_jsonl(
        out, emit_stage2(handle, split=params["split"], subsample_seed=subsample_seed)
    )
    write_manifest(out, "emit-stage2", params, inputs=[params["data_root"]])
    print(f"wrote {count} stage-2 windows to {out}")
    return 0


def _tokenized_records(input_path: str, cfg: QuantizerConfig) -> Iterator[dict]:
    for record in iter_jsonl(input_path):
        series = TimeSeries(
            values=record["readings"],
            sample_rate_hz=record.get("sample_rate_hz", 1.0),
            sensor_name=record.get("sensor_name", "sensor"),
            channel_id=record.get("channel_id", "ch0"),
        )
        seq = tokenize_series(series, cfg)
        yield {
            "id": record.get("id"),
            "token_ids": list(seq.token_ids),
            "scale": seq.scale,
            "config_id": seq.config_id,
            "n": len(record["readings"]),
        }


def cmd_tokenize(args) -> int:
    if args.from_manifest:
        subcommand, params = load_manifest_params(args.from_manifest)
        if subcommand != "tokenize":
            raise CliError(f"manifest is for {subcommand!r}, not tokenize")
        out = Path(args.out) if args.out else Path(params["out"])
        params = dict(params, out=str(out))
    else:
        params = {
            "input": _require(args, "input"),
            "quantizer": args.quantizer,
            "seed": args.seed,
            "out": _require(args, "out"),
        }
        out = Path(params["out"])

    cfg = QuantizerConfig.load(params["quantizer"]) if params["quantizer"] else default_config()
    count = write_jsonl(out, _tokenized_records(params["input"], cfg))
    cfg.save(out.with_name(out.name + ".quantizer.json"))
    write_manifest(out, "tokenize", params, inputs=[params["input"]])
    print(f"wrote {count} token sequences to {out}")
    return 0


def _index_by_id(path: str, required: Iterable[str] = ()) -> dict[str, dict]:
    table: dict[str, dict] = {}
    for record in iter_jsonl(path):
        rid = record.get("id")
        if rid is None:
            raise CliError(f"{path}: record without an 'id' field")
        for key in required:
            if key not in record:
                raise CliError(f"{path}: record {rid!r} missing {key!r}")
        table[rid] = record
    return table


def _detect_task(pred_records: list[dict]) -> str:
    if not pred_records:
        raise CliError("no prediction records")
    first = pred_records[0]
    if "pred_label" in first:
        return "classification"
    if "generated_text" in first:
        return "text"
    raise CliError("cannot infer task: records carry neither pred_label nor generated_text")


def _print_text_table(scores_x100: dict) -> None:
    names = {"bleu1": "BLEU-1", "rouge1": "ROUGE-1", "rougeL": "ROUGE-L", "meteor": "METEOR"}
    print(f"{'metric':<10}{'x100':>8}")
    for key, label in names.items():
        print(f"{label:<10}{scores_x100[key]:>8.2f}")


def _print_classification_table(report: dict) -> None:
    print(f"{'class':<8}{'precision':>10}{'recall':>8}{'f1':>8}{'support':>9}")
    for i, (p, r, f, s) in enumerate(
        zip(report["precision"], report["recall"], report["f1"], report["support"])
    ):
        print(f"{i:<8}{100 * p:>10.2f}{100 * r:>8.2f}{100 * f:>8.2f}{s:>9}")
    print(f"{'f1_macro':<8}{report['f1_macro_x100']:>10.2f}")
    print(f"{'accuracy':<8}{report['accuracy_x100']:>10.2f}")


def cmd_metrics(args) -> int:
    preds = list(iter_jsonl(args.pred))
    task = args.task if args.task != "auto" else _detect_task(preds)
    if task == "text":
        truth = _index_by_id(args.truth, required=("answer",))
        pairs = []
        for record in preds:
            rid = record.get("id")
            if rid not in truth:
                raise CliError(f"prediction {rid!r} has no matching truth record")
            pairs.append((rid, record["generated_text"], truth[rid]["answer"]))
        report = score_text_pairs(pairs).to_json_dict()
        table = report["scores_x100"]
        printer = lambda: _print_text_table(table)
    else:
        truth = _index_by_id(args.truth, required=("label",))
        pred_labels, gold_labels = [], []
        num_classes = None
        for record in preds:
            rid = record.get("id")
            if rid not in truth:
                raise CliError(f"prediction {rid!r} has no matching truth record")
            pred_labels.append(int(record["pred_label"]))
            gold_labels.append(int(truth[rid]["label"]))
            if "num_classes" in truth[rid]:
                num_classes = int(truth[rid]["num_classes"])
        report = classification_report(pred_labels, gold_labels, num_classes).to_json_dict()
        printer = lambda: _print_classification_table(report)

    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
        write_manifest(
            out, "metrics",
            {"pred": args.pred, "truth": args.truth, "task": task, "seed": args.seed,
             "out": str(out)},
            inputs=[args.pred, args.truth],
        )
    printer()
    return 0


def cmd_verify(args) -> int:
    truth = _index_by_id(args.truth, required=("answer", "report"))
    if args.pred:
        items = (
            (r.get("id"), r["generated_text"]) for r in iter_jsonl(args.pred)
        )
        inputs = [args.truth, args.pred]
    else:
        items = ((rid, record["answer"]) for rid, record in truth.items())
        inputs = [args.truth]

    histogram = {score: 0 for score in (1, 2, 3, 4, 5)}
    faithful = 0
    total = 0

    def verdicts() -> Iterator[dict]:
        nonlocal faithful, total
        for rid, text in items:
            if rid not in truth:
                raise CliError(f"prediction {rid!r} has no matching truth record")
            report = TrendReport.from_json_dict(truth[rid]["report"])
            verdict = verify_trend_text(text, report)
            histogram[verdict.score_1_to_5] += 1
            faithful += verdict.faithful
            total += 1
            yield {"id": rid, "compact": verdict.compact(), **verdict.to_json_dict()}

    if args.out:
        write_jsonl(args.out, verdicts())
        write_manifest(
            Path(args.out), "verify",
            {"truth": args.truth, "pred": args.pred, "seed": args.seed, "out": args.out},
            inputs=inputs,
        )
    else:
        for record in verdicts():
            print(dump_canonical(record))

    print(f"{'score':<7}{'pairs':>7}")
    for score in (5, 4, 3, 2, 1):
        print(f"{score:<7}{histogram[score]:>7}")
    mean = (
        sum(score * n for score, n in histogram.items()) / total if total else 0.0
    )
    print(f"mean score {mean:.3f}; faithful {faithful}/{total}")
    return 0 if total else 1


def cmd_judge(args) -> int:
    truth = _index_by_id(args.truth, required=("answer",))
    pairs = []
    for record in iter_jsonl(args.pred):
        rid = record.get("id")
        if rid not in truth:
            raise CliError(f"prediction {rid!r} has no matching truth record")
        pairs.append((rid, record["generated_text"], truth[rid]["answer"]))

    overrides = {}
    if args.endpoint:
        overrides["endpoint"] = args.endpoint
    if args.model:
        overrides["model"] = args.model
    if args.api_key_env:
        overrides["api_key_env"] = args.api_key_env
    if args.max_retries is not None:
        overrides["max_retries"] = args.max_retries
    if args.timeout is not None:
        overrides["timeout_s"] = args.timeout
    cfg = JudgeConfig(**overrides)
    transport = CassetteTransport.from_file(args.cassette) if args.cassette else HttpTransport()

    results = judge_many(pairs, cfg, transport)
    records = (
        {"id": rid, "compact": f"{res.score}#{res.reason}", **res.to_json_dict()}
        for rid, res in sorted(results.items())
    )
    if args.out:
        write_jsonl(args.out, records)
        write_manifest(
            Path(args.out), "judge",
            {"pred": args.pred, "truth": args.truth, "cassette": args.cassette,
             "model": cfg.model, "temperature": cfg.temperature, "seed": args.seed,
             "out": args.out},
            inputs=[args.pred, args.truth],
        )
    else:
        for record in records:
            print(dump_canonical(record))
    scores = [res.score for res in results.values()]
    if scores:
        print(f"judged {len(scores)} pairs; mean score {sum(scores) / len(scores):.3f}")
    return 0


def cmd_report(args) -> int:
    report = json.loads(Path(args.input).read_text())
    if "scores_x100" in report:
        _print_text_table(report["scores_x100"])
    elif "f1_macro_x100" in report:
        _print_classification_table(report)
    else:
        raise CliError(f"{args.input}: not a recognizable metrics report")
    return 0


_HANDLERS = {
    "forge-stage1": cmd_forge_stage1,
    "emit-stage2": cmd_emit_stage2,
    "tokenize": cmd_tokenize,
    "metrics": cmd_metrics,
    "verify": cmd_verify,
    "judge": cmd_judge,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.subcommand](args)
    except (CliError, DatasetError, JudgeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
