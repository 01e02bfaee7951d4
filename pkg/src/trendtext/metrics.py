"""Text-overlap and classification metrics.

Shared tokenization for all text metrics: lowercase, then maximal runs of
[a-z0-9]; punctuation acts as a boundary and is dropped, so "0.24" splits
into "0" and "24" on both sides of a comparison. All scores live in [0, 1]
and are reported x100 externally.

* BLEU-1: modified (clipped) unigram precision with the standard brevity
  penalty against the closest reference length; no smoothing.
* ROUGE-1: unigram overlap F-measure (beta = 1).
* ROUGE-L: longest-common-subsequence F-measure (beta = 1).
* METEOR: exact then Porter-stemmed unigram alignment (leftmost-greedy per
  stage), recall-weighted harmonic mean (alpha = 0.9), fragmentation
  penalty gamma * ((chunks - 1) / matches) ** beta with gamma = 0.5 and
  beta = 3, so a single contiguous chunk carries no penalty. No synonym
  dictionary stage.

Classification metrics follow the per-class precision/recall/F1 and
unweighted macro-F1 definitions, with every zero-division convention set
to 0. Internals use exact rational arithmetic; exposed scores are floats.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from collections import Counter
from fractions import Fraction
from typing import Iterable, Sequence

from .porter import stem

TOKENIZER_DESCRIPTION = "lowercase; tokens are maximal [a-z0-9] runs; punctuation dropped"

METEOR_ALPHA = 0.9
METEOR_BETA = 3.0
METEOR_GAMMA = 0.5

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


# ---------------------------------------------------------------------------
# BLEU-1
# ---------------------------------------------------------------------------

def bleu1(candidate: str, references: Sequence[str] | str) -> float:
    """Clipped unigram precision with brevity penalty, no smoothing."""
    import math

    if isinstance(references, str):
        references = [references]
    cand = tokenize(candidate)
    refs = [tokenize(r) for r in references]
    if not cand or not refs:
        return 0.0
    cand_counts = Counter(cand)
    clipped = 0
    for token, count in cand_counts.items():
        best = max(ref.count(token) for ref in refs)
        clipped += min(count, best)
    if clipped == 0:
        return 0.0
    precision = clipped / len(cand)
    # Closest reference length; ties favor the shorter reference.
    r = min((abs(len(ref) - len(cand)), len(ref)) for ref in refs)[1]
    c = len(cand)
    brevity = 1.0 if c > r else math.exp(1 - r / c)
    return precision * brevity


# ---------------------------------------------------------------------------
# ROUGE
# ---------------------------------------------------------------------------

ROUGE_VARIANTS = ("rouge1", "rougeL")


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[-1]))
        prev = cur
    return prev[-1]


def rouge(candidate: str, reference: str, variant: str = "rouge1") -> float:
    """Unigram (rouge1) or LCS-based (rougeL) F-measure with beta = 1."""
    if variant not in ROUGE_VARIANTS:
        raise ValueError(f"variant must be one of {ROUGE_VARIANTS}, got {variant!r}")
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return 0.0
    if variant == "rouge1":
        overlap = sum((Counter(cand) & Counter(ref)).values())
    else:
        overlap = _lcs_length(cand, ref)
    return _f1(overlap / len(cand), overlap / len(ref))


# ---------------------------------------------------------------------------
# METEOR
# ---------------------------------------------------------------------------

def _greedy_stage_matches(
    cand: list[str],
    ref: list[str],
    cand_free: list[bool],
    ref_free: list[bool],
    key,
) -> list[tuple[int, int]]:
    pairs = []
    for i, token in enumerate(cand):
        if not cand_free[i]:
            continue
        ck = key(token)
        for j, rtoken in enumerate(ref):
            if ref_free[j] and key(rtoken) == ck:
                pairs.append((i, j))
                cand_free[i] = False
                ref_free[j] = False
                break
    return pairs


def meteor_alignment(cand: list[str], ref: list[str]) -> list[tuple[int, int]]:
    """Exact matches first, then Porter-stem matches, leftmost-greedy."""
    cand_free = [True] * len(cand)
    ref_free = [True] * len(ref)
    pairs = _greedy_stage_matches(cand, ref, cand_free, ref_free, key=lambda t: t)
    pairs += _greedy_stage_matches(cand, ref, cand_free, ref_free, key=stem)
    return sorted(pairs)


def _count_chunks(pairs: list[tuple[int, int]]) -> int:
    chunks = 0
    prev = None
    for i, j in pairs:
        if prev is None or i != prev[0] + 1 or j != prev[1] + 1:
            chunks += 1
        prev = (i, j)
    return chunks


def meteor(candidate: str, reference: str) -> float:
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return 0.0
    pairs = meteor_alignment(cand, ref)
    m = len(pairs)
    if m == 0:
        return 0.0
    precision = m / len(cand)
    recall = m / len(ref)
    f_mean = precision * recall / (METEOR_ALPHA * precision + (1 - METEOR_ALPHA) * recall)
    chunks = _count_chunks(pairs)
    penalty = METEOR_GAMMA * ((chunks - 1) / m) ** METEOR_BETA
    return f_mean * (1 - penalty)


# ---------------------------------------------------------------------------
# corpus-level text report
# ---------------------------------------------------------------------------

@dataclass
class MetricReport:
    bleu1: float
    rouge1: float
    rougeL: float
    meteor: float
    per_pair: list[dict] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        scores = {
            "bleu1": self.bleu1,
            "rouge1": self.rouge1,
            "rougeL": self.rougeL,
            "meteor": self.meteor,
        }
        return {
            "settings": {
                "tokenizer": TOKENIZER_DESCRIPTION,
                "bleu_smoothing": "none",
                "meteor": (
                    f"exact+porter stages, alpha={METEOR_ALPHA}, beta={METEOR_BETA}, "
                    f"gamma={METEOR_GAMMA}, no synonym dictionary"
                ),
            },
            "scores": scores,
            "scores_x100": {k: 100.0 * v for k, v in scores.items()},
            "num_pairs": len(self.per_pair),
            "per_pair": self.per_pair,
        }


def score_text_pairs(pairs: Iterable[tuple[str, str, str]]) -> MetricReport:
    """Mean per-pair scores over (id, candidate, reference) triples."""
    per_pair = []
    for pair_id, candidate, reference in pairs:
        per_pair.append(
            {
                "id": pair_id,
                "bleu1": bleu1(candidate, [reference]),
                "rouge1": rouge(candidate, reference, "rouge1"),
                "rougeL": rouge(candidate, reference, "rougeL"),
                "meteor": meteor(candidate, reference),
            }
        )
    if not per_pair:
        return MetricReport(0.0, 0.0, 0.0, 0.0, [])

    def mean(key: str) -> float:
        return sum(p[key] for p in per_pair) / len(per_pair)

    return MetricReport(
        bleu1=mean("bleu1"),
        rouge1=mean("rouge1"),
        rougeL=mean("rougeL"),
        meteor=mean("meteor"),
        per_pair=per_pair,
    )


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

@dataclass
class ClassificationReport:
    num_classes: int
    confusion: tuple[tuple[int, ...], ...]  # rows = gold class, columns = predicted
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    f1: tuple[float, ...]
    f1_macro: float
    accuracy: float

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(sum(row) for row in self.confusion)

    def to_json_dict(self) -> dict:
        return {
            "num_classes": self.num_classes,
            "confusion": [list(row) for row in self.confusion],
            "precision": list(self.precision),
            "recall": list(self.recall),
            "f1": list(self.f1),
            "support": list(self.support),
            "f1_macro": self.f1_macro,
            "accuracy": self.accuracy,
            "f1_macro_x100": 100.0 * self.f1_macro,
            "accuracy_x100": 100.0 * self.accuracy,
        }


def classification_report(
    pred: Sequence[int], gold: Sequence[int], num_classes: int | None = None
) -> ClassificationReport:
    """Per-class precision/recall/F1 plus unweighted macro-F1 and accuracy.

    Classes with no predictions (or no support) take precision (recall) 0,
    which also zeroes their F1; that keeps degenerate cases deterministic.
    """
    if len(pred) != len(gold):
        raise ValueError(f"pred and gold lengths differ: {len(pred)} vs {len(gold)}")
    if len(gold) == 0:
        raise ValueError("need at least one example")
    if num_classes is None:
        num_classes = max(max(pred), max(gold)) + 1
    for label in (*pred, *gold):
        if not 0 <= label < num_classes:
            raise ValueError(f"label {label} outside [0, {num_classes})")

    confusion = [[0] * num_classes for _ in range(num_classes)]
    for p, g in zip(pred, gold):
        confusion[g][p] += 1

    precision: list[Fraction] = []
    recall: list[Fraction] = []
    f1: list[Fraction] = []
    for i in range(num_classes):
        tp = confusion[i][i]
        fp = sum(confusion[g][i] for g in range(num_classes)) - tp
        fn = sum(confusion[i]) - tp
        p = Fraction(tp, tp + fp) if tp + fp else Fraction(0)
        r = Fraction(tp, tp + fn) if tp + fn else Fraction(0)
        f = 2 * p * r / (p + r) if p + r else Fraction(0)
        precision.append(p)
        recall.append(r)
        f1.append(f)

    macro = sum(f1, Fraction(0)) / num_classes
    correct = sum(confusion[i][i] for i in range(num_classes))
    accuracy = Fraction(correct, len(gold))

    return ClassificationReport(
        num_classes=num_classes,
        confusion=tuple(tuple(row) for row in confusion),
        precision=tuple(float(p) for p in precision),
        recall=tuple(float(r) for r in recall),
        f1=tuple(float(f) for f in f1),
        f1_macro=float(macro),
        accuracy=float(accuracy),
    )
