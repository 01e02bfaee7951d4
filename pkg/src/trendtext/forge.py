"""Template-driven synthesis of (system prompt, question, answer) triples
from trend reports.

Answers follow the fixed three-section layout every recorded golden answer
uses: one line per trend segment, a blank line, one count line per kind
present (in order of first appearance), a blank line, then a summary
paragraph of four sentences (context, change statistics, cumulative
durations, overall trend). Randomness picks the template variant inside
each section and one synonym set for the whole answer; it never reorders
sections.

Numeric formatting: times via :func:`trendtext.trends.format_seconds`,
counts as digits (banks may opt into words with ``{name:w}``).

``forge_corpus`` drives the full stage-1 pipeline per (subject, channel):
random segmentation, optional instance normalization, trend analysis,
rendering. Every random draw descends from the master seed through
sha256-derived sub-seeds, so output is byte-identical for any worker count.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .core import (
    TimeSeries,
    derive_seed,
    instance_normalize,
    segment_randomly,
)
from .templates import SynonymSet, TemplateBank, render_template
from .trends import TrendKind, TrendReport, format_hz, format_seconds, kinds_by_duration, segment_trends

SCHEMA_VERSION = 1

QUESTION_KINDS = ("trend", "summary")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def _choice(rng: np.random.Generator, items: tuple) -> object:
    return items[int(rng.integers(len(items)))]


def render_system_prompt(n_points: int, sample_rate_hz: float, bank: TemplateBank | None = None) -> str:
    """Instantiate the system prompt with the point count and sample rate."""
    if n_points < 1:
        raise ValueError(f"n_points must be >= 1, got {n_points}")
    bank = bank or TemplateBank.default()
    return render_template(
        bank.system_prompt,
        {"N": n_points, "sample_rate": format_hz(sample_rate_hz)},
    )


def render_question(kind: str, bank: TemplateBank, data_name: str, seed: int) -> str:
    """Uniformly drawn question template with {data} bound."""
    if kind == "trend":
        templates = bank.question_trend
    elif kind == "summary":
        templates = bank.question_summary
    else:
        raise ValueError(f"question kind must be one of {QUESTION_KINDS}, got {kind!r}")
    rng = _rng(seed)
    template = _choice(rng, templates)
    return render_template(template, {"data": data_name})


def _cumulative_kind_order(report: TrendReport, kind_order: tuple[TrendKind, ...] | None) -> list[TrendKind]:
    if kind_order is not None:
        ordered = [k for k in kind_order if k in report.cumulative_seconds]
        leftover = [k for k in kinds_by_duration(report) if k not in ordered]
        return ordered + leftover
    return kinds_by_duration(report)


def render_trend_answer(
    report: TrendReport,
    bank: TemplateBank,
    seed: int,
    sensor_name: str = "sensor",
    data_name: str = "sensor data",
) -> str:
    """Render the full three-section answer for one trend report.

    Template variants and the synonym set are drawn once per answer, in a
    fixed order (synonyms, segment line, count, context, change stats,
    cumulative, overall), so identical (report, bank, seed) give
    byte-identical text.
    """
    rng = _rng(seed)
    syn: SynonymSet = _choice(rng, bank.synonyms)
    segment_tpl = _choice(rng, bank.answer_segment_line)
    count_tpl = _choice(rng, bank.answer_trend_count)
    context_tpl = _choice(rng, bank.answer_context)
    change_tpl = _choice(rng, bank.answer_change_stats)
    cumulative_tpl = _choice(rng, bank.answer_cumulative)
    overall_tpl = _choice(rng, bank.answer_overall)

    segment_lines = [
        render_template(
            segment_tpl,
            {
                "start_time": format_seconds(seg.start_time_s),
                "end_time": format_seconds(seg.end_time_s),
                "trend": syn[seg.kind],
            },
        )
        for seg in report.segments
    ]

    count_lines = [
        render_template(count_tpl, {"trend": syn[kind], "num": count})
        for kind, count in report.counts.items()
    ]

    context = render_template(
        context_tpl,
        {
            "data_name": data_name,
            "sensor_name": sensor_name,
            "start_time": format_seconds(report.start_time_s),
            "end_time": format_seconds(report.end_time_s),
        },
    )
    change_stats = render_template(
        change_tpl,
        {"trend_num": report.num_distinct_kinds, "change_num": report.change_count},
    )
    clauses = []
    for position, kind in enumerate(_cumulative_kind_order(report, cumulative_tpl.kind_order)):
        clauses.append(
            render_template(
                cumulative_tpl.clause(position),
                {
                    "trend_type": syn[kind],
                    "total_time": format_seconds(report.cumulative_seconds[kind]),
                },
            )
        )
    cumulative = "".join(clauses) + "."
    overall = render_template(overall_tpl, {"overall_trend": syn[report.overall]})

    paragraph = " ".join([context, change_stats, cumulative, overall])
    return "\n".join(segment_lines) + "\n\n" + "\n".join(count_lines) + "\n\n" + paragraph


@dataclass(frozen=True)
class SourceRef:
    """Provenance of one QA pair: where its readings came from."""

    dataset: str
    subject: str
    channel_id: str
    start_index: int
    length: int
    seed: int


@dataclass(frozen=True)
class QAPair:
    """One generated triple bound to its source readings and report.

    The verifier guarantees every numeric claim in ``answer`` is
    reproducible from ``report``; corpora serialize these as flat JSONL
    records (see :func:`forge_records_for_channel`).
    """

    system_prompt: str
    question: str
    answer: str
    report: TrendReport
    source: SourceRef

    @classmethod
    def from_record(cls, record: dict) -> "QAPair":
        return cls(
            system_prompt=record["system_prompt"],
            question=record["question"],
            answer=record["answer"],
            report=TrendReport.from_json_dict(record["report"]),
            source=SourceRef(
                dataset=record["dataset"],
                subject=record["subject"],
                channel_id=record["channel_id"],
                start_index=record["start_index"],
                length=record["length"],
                seed=record["seed"],
            ),
        )


@dataclass(frozen=True)
class ForgeOptions:
    """Stage-1 generation knobs.

    ``min_len``/``max_len`` default to the dataset config's alignment-stage
    range; ``max_len`` is clipped to each channel's length and channels
    shorter than ``min_len`` contribute nothing.
    """

    question_mix_trend: float = 0.5
    normalize: bool = True
    epsilon: float = 0.0
    data_name: str = "sensor data"
    min_len: int | None = None
    max_len: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.question_mix_trend <= 1.0:
            raise ValueError("question_mix_trend must be in [0, 1]")
        if self.min_len is not None and self.min_len < 2:
            raise ValueError("min_len must be >= 2: a trend needs two readings")


def forge_records_for_channel(
    series: TimeSeries,
    dataset_name: str,
    subject: str,
    options: ForgeOptions,
    bank: TemplateBank,
    task_seed: int,
    min_len: int,
    max_len: int,
) -> list[dict]:
    """All stage-1 records for one (subject, channel) series.

    Pure function of its arguments; this is the unit parallel workers run.
    """
    n = len(series)
    if n < min_len:
        return []
    max_len = min(max_len, n)
    task_rng = _rng(task_seed)
    seg_seed = int(task_rng.integers(2**63))
    segments = segment_randomly(series, min_len, max_len, seg_seed)

    records: list[dict] = []
    for spec in segments:
        record_seed = int(task_rng.integers(2**63))
        pick_trend = bool(task_rng.random() < options.question_mix_trend)

        sub = series.slice(spec.start_index, spec.length)
        if options.normalize:
            engine_input = instance_normalize(sub)
            rendered_sensor = f"normalized {series.sensor_name}"
        else:
            engine_input = sub
            rendered_sensor = series.sensor_name
        report = segment_trends(engine_input, options.epsilon)

        question_kind = "trend" if pick_trend else "summary"
        question = render_question(
            question_kind, bank, options.data_name, derive_seed(record_seed, "question")
        )
        answer = render_trend_answer(
            report,
            bank,
            derive_seed(record_seed, "answer"),
            sensor_name=rendered_sensor,
            data_name=options.data_name,
        )
        records.append(
            {
                "schema_version": SCHEMA_VERSION,
                "kind": "stage1",
                "id": f"{dataset_name}/{subject}/{series.channel_id}/{spec.start_index}",
                "dataset": dataset_name,
                "subject": subject,
                "channel_id": series.channel_id,
                "sensor_name": series.sensor_name,
                "start_index": spec.start_index,
                "length": spec.length,
                "sample_rate_hz": series.sample_rate_hz,
                "normalized": options.normalize,
                "readings": [float(v) for v in engine_input.values],
                "system_prompt": render_system_prompt(spec.length, series.sample_rate_hz, bank),
                "question_kind": question_kind,
                "question": question,
                "answer": answer,
                "report": report.to_json_dict(),
                "seed": record_seed,
            }
        )
    return records


def forge_corpus(
    handle,
    options: ForgeOptions,
    seed: int,
    bank: TemplateBank | None = None,
    split: str = "train",
    workers: int = 1,
) -> Iterator[dict]:
    """Stage-1 corpus stream over every (subject, channel) of a dataset.

    ``handle`` is a :class:`trendtext.datasets.DatasetHandle`. Tasks run in
    a stable (subject, channel) order; each derives its own seed from the
    master seed, so record content is independent of ``workers`` and the
    stream order is always the task order.
    """
    bank = bank or TemplateBank.default()
    cfg = handle.config
    min_len = options.min_len if options.min_len is not None else cfg.stage1_len_range[0]
    max_len = options.max_len if options.max_len is not None else cfg.stage1_len_range[1]
    if not 2 <= min_len <= max_len:
        raise ValueError(f"need 2 <= min_len <= max_len, got [{min_len}, {max_len}]")

    def _tasks() -> Iterable[tuple[str, TimeSeries, int]]:
        for subject, mcs, _labels in handle.iter_subjects(split=split, decimated=True):
            for channel in mcs.channels:
                task_seed = derive_seed(seed, cfg.name, subject, channel.channel_id)
                yield subject, channel, task_seed

    def _run(task: tuple[str, TimeSeries, int]) -> list[dict]:
        subject, channel, task_seed = task
        return forge_records_for_channel(
            channel, cfg.name, subject, options, bank, task_seed, min_len, max_len
        )

    if workers <= 1:
        for task in _tasks():
            yield from _run(task)
        return
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        # Executor.map preserves submission order, keeping output identical
        # to the sequential run.
        for records in pool.map(_run, _tasks()):
            yield from records
