"""Template bank: the sentence inventory behind generated questions/answers.

Banks load from a plain JSON file so new synonym variants can be added
without code changes. Placeholders use ``{name}`` syntax restricted to a
fixed vocabulary; ``{name:w}`` renders an integer as English words
("seven" instead of "7"), which some recorded golden answers use.

Cumulative-summary entries are objects rather than strings because that
sentence has one clause per trend kind: ``{"first": ..., "rest": [...],
"kind_order": [...]}``. The first clause uses "first", the k-th further
kind uses ``rest[min(k-1, len(rest)-1)]``, and a final period is appended.
``kind_order`` (optional) pins the order the kinds are listed in; without
it the renderer lists kinds by descending cumulative duration.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

from .numwords import int_to_words
from .trends import TrendKind


class TemplateError(ValueError):
    """A template references an unbound or unknown placeholder."""


PLACEHOLDER_VOCABULARY = frozenset(
    {
        "start_time",
        "end_time",
        "trend",
        "data",
        "num",
        "data_name",
        "sensor_name",
        "trend_num",
        "change_num",
        "trend_type",
        "total_time",
        "overall_trend",
        "sample_rate",
        "N",
    }
)

_PLACEHOLDER_RE = re.compile(r"\{([A-Za-z_]+)(:w)?\}")


def render_template(template: str, bindings: Mapping[str, object]) -> str:
    """Substitute every placeholder; unbound names raise TemplateError."""

    def _sub(match: re.Match) -> str:
        name, as_words = match.group(1), match.group(2)
        if name not in bindings:
            raise TemplateError(f"template placeholder {{{name}}} has no binding")
        value = bindings[name]
        if as_words:
            return int_to_words(int(value))
        return str(value)

    rendered = _PLACEHOLDER_RE.sub(_sub, template)
    if "{" in rendered or "}" in rendered:
        raise TemplateError(f"template leaves a literal brace after rendering: {template!r}")
    return rendered


def template_placeholders(template: str) -> set[str]:
    return {m.group(1) for m in _PLACEHOLDER_RE.finditer(template)}


def _check_templates(name: str, templates: Sequence[str]) -> None:
    if not templates:
        raise ValueError(f"template bank section {name!r} must be non-empty")
    for tpl in templates:
        unknown = template_placeholders(tpl) - PLACEHOLDER_VOCABULARY
        if unknown:
            raise TemplateError(f"section {name!r} uses unknown placeholders {sorted(unknown)}")
        # Braces that are not part of well-formed placeholders are a bank bug.
        stripped = _PLACEHOLDER_RE.sub("", tpl)
        if "{" in stripped or "}" in stripped:
            raise TemplateError(f"section {name!r} contains a stray brace: {tpl!r}")


@dataclass(frozen=True)
class CumulativeTemplate:
    """One variant of the per-kind cumulative-duration sentence."""

    first: str
    rest: tuple[str, ...]
    kind_order: tuple[TrendKind, ...] | None = None

    def clause(self, position: int) -> str:
        if position == 0:
            return self.first
        return self.rest[min(position - 1, len(self.rest) - 1)]

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "CumulativeTemplate":
        order = d.get("kind_order")
        return cls(
            first=d["first"],
            rest=tuple(d["rest"]),
            kind_order=tuple(TrendKind(k) for k in order) if order else None,
        )


@dataclass(frozen=True)
class SynonymSet:
    """The word used for each trend kind, fixed for the span of one answer."""

    words: Mapping[TrendKind, str]

    def __getitem__(self, kind: TrendKind) -> str:
        return self.words[kind]

    @classmethod
    def from_json_dict(cls, d: Mapping[str, str]) -> "SynonymSet":
        words = {TrendKind(k): v for k, v in d.items()}
        missing = set(TrendKind) - set(words)
        if missing:
            raise ValueError(f"synonym set missing kinds {sorted(k.value for k in missing)}")
        return cls(words=words)


@dataclass(frozen=True)
class TemplateBank:
    system_prompt: str
    question_trend: tuple[str, ...]
    question_summary: tuple[str, ...]
    answer_segment_line: tuple[str, ...]
    answer_trend_count: tuple[str, ...]
    answer_context: tuple[str, ...]
    answer_change_stats: tuple[str, ...]
    answer_cumulative: tuple[CumulativeTemplate, ...]
    answer_overall: tuple[str, ...]
    synonyms: tuple[SynonymSet, ...]

    def __post_init__(self) -> None:
        _check_templates("system_prompt", [self.system_prompt])
        _check_templates("question_trend", self.question_trend)
        _check_templates("question_summary", self.question_summary)
        _check_templates("answer_segment_line", self.answer_segment_line)
        _check_templates("answer_trend_count", self.answer_trend_count)
        _check_templates("answer_context", self.answer_context)
        _check_templates("answer_change_stats", self.answer_change_stats)
        _check_templates("answer_overall", self.answer_overall)
        if not self.answer_cumulative:
            raise ValueError("template bank section 'answer_cumulative' must be non-empty")
        for cum in self.answer_cumulative:
            _check_templates("answer_cumulative", [cum.first, *cum.rest])
        if not self.synonyms:
            raise ValueError("template bank needs at least one synonym set")

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "TemplateBank":
        return cls(
            system_prompt=d["system_prompt"],
            question_trend=tuple(d["question_trend"]),
            question_summary=tuple(d["question_summary"]),
            answer_segment_line=tuple(d["answer_segment_line"]),
            answer_trend_count=tuple(d["answer_trend_count"]),
            answer_context=tuple(d["answer_context"]),
            answer_change_stats=tuple(d["answer_change_stats"]),
            answer_cumulative=tuple(
                CumulativeTemplate.from_json_dict(c) for c in d["answer_cumulative"]
            ),
            answer_overall=tuple(d["answer_overall"]),
            synonyms=tuple(SynonymSet.from_json_dict(s) for s in d["synonyms"]),
        )

    @classmethod
    def from_json_file(cls, path: str | Path) -> "TemplateBank":
        return cls.from_json_dict(json.loads(Path(path).read_text()))

    @classmethod
    def default(cls) -> "TemplateBank":
        text = resources.files("trendtext.data").joinpath("template_bank.json").read_text()
        return cls.from_json_dict(json.loads(text))
