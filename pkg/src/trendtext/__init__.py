"""Deterministic wearable-sensor pipeline: trend-description QA corpora,
scaled-and-binned token sequences, windowed classification datasets, and
the matching text/classification evaluation battery with a rule-based
verifier for generated trend text."""

__version__ = "0.1.0"

from .core import (
    ChannelStats,
    MultiChannelSeries,
    SegmentSpec,
    TimeSeries,
    channel_stats,
    derive_seed,
    instance_normalize,
    segment_randomly,
    window,
)
from .trends import (
    TrendKind,
    TrendReport,
    TrendSegment,
    classify_deltas,
    format_seconds,
    overall_trend,
    segment_trends,
)
from .quantize import (
    QuantizerConfig,
    TokenSequence,
    default_config,
    dequantize,
    mean_scale,
    quantize,
    tokenize_series,
)
from .templates import TemplateBank
from .forge import ForgeOptions, forge_corpus, render_question, render_system_prompt, render_trend_answer
from .datasets import DatasetConfig, DatasetHandle, decimate, emit_stage2, load_config, load_dataset
from .metrics import ClassificationReport, MetricReport, bleu1, classification_report, meteor, rouge
from .verifier import VerifierVerdict, verify_trend_text
from .judge import JudgeConfig, JudgeResult, build_eval_prompt, build_gen_prompt, judge_pair

__all__ = [
    "__version__",
    "ChannelStats", "MultiChannelSeries", "SegmentSpec", "TimeSeries",
    "channel_stats", "derive_seed", "instance_normalize", "segment_randomly", "window",
    "TrendKind", "TrendReport", "TrendSegment", "classify_deltas", "format_seconds",
    "overall_trend", "segment_trends",
    "QuantizerConfig", "TokenSequence", "default_config", "dequantize", "mean_scale",
    "quantize", "tokenize_series",
    "TemplateBank", "ForgeOptions", "forge_corpus", "render_question",
    "render_system_prompt", "render_trend_answer",
    "DatasetConfig", "DatasetHandle", "decimate", "emit_stage2", "load_config", "load_dataset",
    "ClassificationReport", "MetricReport", "bleu1", "classification_report", "meteor", "rouge",
    "VerifierVerdict", "verify_trend_text",
    "JudgeConfig", "JudgeResult", "build_eval_prompt", "build_gen_prompt", "judge_pair",
]
