"""Rule-based verification of generated trend descriptions.

``verify_trend_text`` parses a (possibly degraded) answer in the generated
three-section style — segment lines, count lines, summary paragraph —
canonicalizes trend synonyms ("ascending" -> growing, "steady" -> stable),
reads counts written as digits or words, and compares every recovered
claim against the ground-truth report.

Scoring is a deterministic analogue of the 1-5 judge rubric, banded by the
kind of disagreement:

==========================================  =====
finding                                     score
==========================================  =====
no discrepancies                            5
exactly one minor discrepancy               4
two or more minor discrepancies             3
any structural error (wrong number of
segments, wrong overall trend)              2
no segment lines parse at all               1
==========================================  =====

Minor discrepancies are a boundary time off, a segment kind off, a count
off, a cumulative duration off, a distinct-kind/change count off, or a
span claim off. Claims the text simply does not make are not counted
against it; only the segment-line section is mandatory.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable

from .numwords import parse_count
from .trends import TrendKind, TrendReport

# Words accepted for each trend kind, from the shipped synonym sets plus
# vocabulary observed in real model outputs.
SYNONYM_WORDS: dict[str, TrendKind] = {}
for _word in ("growing", "increasing", "ascending", "upward", "rising", "climbing", "upwards"):
    SYNONYM_WORDS[_word] = TrendKind.GROWING
for _word in ("declining", "decreasing", "descending", "downward", "falling", "dropping", "downwards"):
    SYNONYM_WORDS[_word] = TrendKind.DECLINING
for _word in ("stable", "consistent", "steady", "constant", "flat", "unchanged", "stationary"):
    SYNONYM_WORDS[_word] = TrendKind.STABLE

_TIME = r"\d+(?:\.\d+)?"
_UNIT = r"(?:s\b|second\b|seconds\b)"
# A digit run or one (possibly hyphenated) word; parse_count decides whether
# it actually names a number, so the candidate pattern stays non-greedy.
_NUM = r"(\d+|[A-Za-z]+(?:-[A-Za-z]+)?)"

_SEGMENT_LINE_RE = re.compile(
    rf"^\s*({_TIME})\s*{_UNIT}?\s*(?:-|–|—|to)\s*({_TIME})\s*{_UNIT}?\s*:\s*([A-Za-z]+)\s*\.?\s*$",
    re.IGNORECASE,
)
_COUNT_LINE_RE = re.compile(
    r"^\s*(?:number|count|total)\s+(?:of\s+)?([A-Za-z]+)\s+(?:trends?|segments?)\s*:\s*(\S+)\s*$",
    re.IGNORECASE,
)
# trend_num: a number right before "trends"/"trend characteristics" (with at
# most one adjective between) that is not itself a change-count phrase.
_TREND_NUM_RES = [
    re.compile(
        rf"\b{_NUM}\s+(?:[A-Za-z]+\s+)?trends?\b(?!\s+(?:changes|shifts))", re.IGNORECASE
    ),
    re.compile(rf"\b{_NUM}\s+(?:[A-Za-z]+\s+)?trend\s+characteristics\b", re.IGNORECASE),
]
_CHANGE_NUM_RES = [
    re.compile(rf"\b{_NUM}\s+(?:trend\s+)?(?:changes|shifts|times|fluctuations)\b", re.IGNORECASE),
    re.compile(rf"\b{_NUM}\s+(?:occurrences|instances)\s+of\b", re.IGNORECASE),
    re.compile(rf"\bchange\s+count\s+(?:reaching|of)\s+{_NUM}\b", re.IGNORECASE),
]
_DURATION_RE_TEMPLATE = r"\b{word}\b(?:\W+\w+){{0,8}}?\W+(%s)\s*seconds?\b" % _TIME
_SPAN_RE = re.compile(
    rf"\b(?:from|between|within\s+the)\s+({_TIME})\s*s?(?:econds?)?\s+(?:to|and|-|–)\s+({_TIME})",
    re.IGNORECASE,
)

_TIME_TOL = 1e-9 + 5e-3  # claimed times are 2-decimal strings; allow half an ulp of that grid


@dataclass(frozen=True)
class ClaimedSegment:
    start_time_s: float
    end_time_s: float
    kind: TrendKind


@dataclass
class ExtractedClaims:
    """Everything the verifier could recover from the text."""

    segments: list[ClaimedSegment] = field(default_factory=list)
    counts: dict[TrendKind, int] = field(default_factory=dict)
    trend_num: int | None = None
    change_num: int | None = None
    durations: dict[TrendKind, float] = field(default_factory=dict)
    overall: TrendKind | None = None
    span: tuple[float, float] | None = None

    def to_json_dict(self) -> dict:
        return {
            "segments": [
                {"start_time_s": s.start_time_s, "end_time_s": s.end_time_s, "kind": s.kind.value}
                for s in self.segments
            ],
            "counts": {k.value: v for k, v in self.counts.items()},
            "trend_num": self.trend_num,
            "change_num": self.change_num,
            "durations": {k.value: v for k, v in self.durations.items()},
            "overall": self.overall.value if self.overall else None,
            "span": list(self.span) if self.span else None,
        }


@dataclass
class VerifierVerdict:
    extracted: ExtractedClaims | None
    faithful: bool
    discrepancies: list[tuple[str, str, str]]
    score_1_to_5: int
    reason: str

    @property
    def parse_failed(self) -> bool:
        return self.extracted is None

    def compact(self) -> str:
        """One "score#reason" line, the same shape judge replies use."""
        return f"{self.score_1_to_5}#{self.reason}"

    def to_json_dict(self) -> dict:
        return {
            "score": self.score_1_to_5,
            "faithful": self.faithful,
            "reason": self.reason,
            "discrepancies": [list(d) for d in self.discrepancies],
            "extracted": self.extracted.to_json_dict() if self.extracted else None,
        }


def canonical_kind(word: str) -> TrendKind | None:
    return SYNONYM_WORDS.get(word.lower())


def _parse_number_token(token: str) -> int | None:
    return parse_count(token)


def extract_claims(text: str) -> ExtractedClaims | None:
    """Parse the answer text; None when not even segment lines are found."""
    claims = ExtractedClaims()
    summary_lines: list[str] = []
    for raw_line in text.splitlines():
        line = raw_line.strip()
        if not line:
            continue
        m = _SEGMENT_LINE_RE.match(line)
        if m:
            kind = canonical_kind(m.group(3))
            if kind is not None:
                claims.segments.append(
                    ClaimedSegment(float(m.group(1)), float(m.group(2)), kind)
                )
                continue
        m = _COUNT_LINE_RE.match(line)
        if m:
            kind = canonical_kind(m.group(1))
            value = _parse_number_token(m.group(2))
            if kind is not None and value is not None and kind not in claims.counts:
                claims.counts[kind] = value
                continue
        summary_lines.append(line)

    if not claims.segments:
        return None

    summary = " ".join(summary_lines)
    _extract_summary_claims(summary, claims)
    return claims


def _sentences(summary: str) -> list[str]:
    return [s.strip() for s in re.split(r"(?<=[.!?])\s+", summary) if s.strip()]


def _first_parseable(patterns: Iterable[re.Pattern], text: str) -> int | None:
    """First regex candidate whose captured token actually names a number."""
    for pattern in patterns:
        for m in pattern.finditer(text):
            value = _parse_number_token(m.group(1))
            if value is not None:
                return value
    return None


def _extract_summary_claims(summary: str, claims: ExtractedClaims) -> None:
    claims.trend_num = _first_parseable(_TREND_NUM_RES, summary)
    claims.change_num = _first_parseable(_CHANGE_NUM_RES, summary)

    sentences = _sentences(summary)
    for sentence in sentences:
        for word, kind in SYNONYM_WORDS.items():
            if kind in claims.durations:
                continue
            m = re.search(_DURATION_RE_TEMPLATE.format(word=word), sentence, re.IGNORECASE)
            if m:
                claims.durations[kind] = float(m.group(1))

    # Overall claim: the last digit-free sentence that names a trend kind.
    for sentence in sentences:
        if re.search(r"\d", sentence):
            continue
        if not re.search(r"\b(?:trend|pattern)\b", sentence, re.IGNORECASE):
            continue
        found: TrendKind | None = None
        for token in re.findall(r"[A-Za-z]+", sentence):
            kind = canonical_kind(token)
            if kind is not None:
                found = kind
        if found is not None:
            claims.overall = found

    m = _SPAN_RE.search(summary)
    if m:
        claims.span = (float(m.group(1)), float(m.group(2)))


def _times_match(claimed: float, actual: float) -> bool:
    return abs(claimed - round(actual, 2)) <= _TIME_TOL


def verify_trend_text(text: str, truth: TrendReport) -> VerifierVerdict:
    """Score a generated description against its ground-truth report."""
    claims = extract_claims(text)
    if claims is None:
        return VerifierVerdict(
            extracted=None,
            faithful=False,
            discrepancies=[("parse", "no segment lines found", "")],
            score_1_to_5=1,
            reason="could not parse any trend segment lines",
        )

    minor: list[tuple[str, str, str]] = []
    structural: list[tuple[str, str, str]] = []

    if len(claims.segments) != len(truth.segments):
        structural.append(
            ("segment_count", str(len(claims.segments)), str(len(truth.segments)))
        )
    else:
        for i, (claimed, actual) in enumerate(zip(claims.segments, truth.segments)):
            if not _times_match(claimed.start_time_s, actual.start_time_s):
                minor.append(
                    (f"segment[{i}].start", str(claimed.start_time_s), str(actual.start_time_s))
                )
            if not _times_match(claimed.end_time_s, actual.end_time_s):
                minor.append(
                    (f"segment[{i}].end", str(claimed.end_time_s), str(actual.end_time_s))
                )
            if claimed.kind != actual.kind:
                minor.append((f"segment[{i}].kind", claimed.kind.value, actual.kind.value))

    for kind, count in truth.counts.items():
        if kind not in claims.counts:
            if claims.counts:
                minor.append((f"count[{kind.value}]", "missing", str(count)))
        elif claims.counts[kind] != count:
            minor.append((f"count[{kind.value}]", str(claims.counts[kind]), str(count)))
    for kind, value in claims.counts.items():
        if kind not in truth.counts:
            minor.append((f"count[{kind.value}]", str(value), "absent"))

    if claims.trend_num is not None and claims.trend_num != truth.num_distinct_kinds:
        minor.append(("distinct_kinds", str(claims.trend_num), str(truth.num_distinct_kinds)))
    if claims.change_num is not None and claims.change_num != truth.change_count:
        minor.append(("change_count", str(claims.change_num), str(truth.change_count)))

    for kind, claimed_duration in claims.durations.items():
        actual = truth.cumulative_seconds.get(kind)
        if actual is None:
            minor.append((f"duration[{kind.value}]", str(claimed_duration), "absent"))
        elif not _times_match(claimed_duration, actual):
            minor.append((f"duration[{kind.value}]", str(claimed_duration), str(actual)))

    if claims.overall is not None and claims.overall != truth.overall:
        structural.append(("overall", claims.overall.value, truth.overall.value))

    if claims.span is not None:
        if not (
            _times_match(claims.span[0], truth.start_time_s)
            and _times_match(claims.span[1], truth.end_time_s)
        ):
            minor.append(
                (
                    "span",
                    f"{claims.span[0]}..{claims.span[1]}",
                    f"{truth.start_time_s}..{truth.end_time_s}",
                )
            )

    discrepancies = structural + minor
    if structural:
        score = 2
    elif len(minor) >= 2:
        score = 3
    elif len(minor) == 1:
        score = 4
    else:
        score = 5
    reason = _reason(structural, minor)
    return VerifierVerdict(
        extracted=claims,
        faithful=not discrepancies,
        discrepancies=discrepancies,
        score_1_to_5=score,
        reason=reason,
    )


def _reason(structural: list, minor: list) -> str:
    if not structural and not minor:
        return "matches the ground truth exactly"
    parts: list[str] = []
    fields = [d[0] for d in structural + minor]
    if any(f == "segment_count" for f in fields):
        parts.append("wrong number of trend segments")
    if any(f == "overall" for f in fields):
        parts.append("wrong overall trend")
    boundary = sum(1 for f in fields if f.startswith("segment["))
    if boundary:
        parts.append(f"{boundary} segment boundary/kind mismatches")
    others = sum(
        1
        for f in fields
        if not f.startswith("segment[") and f not in ("segment_count", "overall")
    )
    if others:
        parts.append(f"{others} count/duration claims differ")
    return "; ".join(parts)
