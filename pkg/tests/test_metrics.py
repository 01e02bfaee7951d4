import itertools
import math
from fractions import Fraction

import pytest

from trendtext.metrics import (
    bleu1,
    classification_report,
    meteor,
    meteor_alignment,
    rouge,
    score_text_pairs,
    tokenize,
)
from trendtext.porter import stem


# ---------------------------------------------------------------------------
# tokenizer
# ---------------------------------------------------------------------------

def test_tokenizer_lowercases_and_splits_punctuation():
    assert tokenize("The trend, overall, is growing.") == [
        "the", "trend", "overall", "is", "growing",
    ]
    assert tokenize("0.24 seconds") == ["0", "24", "seconds"]
    assert tokenize("") == []


# ---------------------------------------------------------------------------
# stemmer (classic vocabulary checks)
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "word,expected",
    [
        ("caresses", "caress"),
        ("ponies", "poni"),
        ("ties", "ti"),
        ("caress", "caress"),
        ("cats", "cat"),
        ("feed", "feed"),
        ("agreed", "agre"),
        ("plastered", "plaster"),
        ("bled", "bled"),
        ("motoring", "motor"),
        ("sing", "sing"),
        ("conflated", "conflat"),
        ("troubled", "troubl"),
        ("sized", "size"),
        ("hopping", "hop"),
        ("tanned", "tan"),
        ("falling", "fall"),
        ("hissing", "hiss"),
        ("fizzed", "fizz"),
        ("failing", "fail"),
        ("filing", "file"),
        ("happy", "happi"),
        ("sky", "sky"),
        ("relational", "relat"),
        ("conditional", "condit"),
        ("rational", "ration"),
        ("digitizer", "digit"),
        ("operator", "oper"),
        ("feudalism", "feudal"),
        ("decisiveness", "decis"),
        ("hopefulness", "hope"),
        ("formaliti", "formal"),
        ("triplicate", "triplic"),
        ("formative", "form"),
        ("formalize", "formal"),
        ("electrical", "electr"),
        ("hopeful", "hope"),
        ("goodness", "good"),
        ("revival", "reviv"),
        ("allowance", "allow"),
        ("inference", "infer"),
        ("adjustable", "adjust"),
        ("replacement", "replac"),
        ("adoption", "adopt"),
        ("cease", "ceas"),
        ("controlling", "control"),
        ("roll", "roll"),
        ("growing", "grow"),
        ("increasing", "increas"),
        ("increases", "increas"),
        ("declining", "declin"),
        ("declines", "declin"),
        ("stable", "stabl"),
    ],
)
def test_porter_stems(word, expected):
    assert stem(word) == expected


def test_stem_short_words_pass_through():
    assert stem("is") == "is"
    assert stem("a") == "a"


# ---------------------------------------------------------------------------
# BLEU-1
# ---------------------------------------------------------------------------

def test_bleu1_identical():
    assert bleu1("a b c", ["a b c"]) == 1.0


def test_bleu1_hand_computed():
    # 2 of 3 unigrams clipped-match, equal lengths so no brevity penalty.
    assert bleu1("a b c", ["a x c"]) == pytest.approx(2 / 3)


def test_bleu1_empty_candidate():
    assert bleu1("", ["a b"]) == 0.0


def test_bleu1_clipping():
    # "the the the" against a reference with a single "the": clipped to 1,
    # and the candidate is longer than the reference so no brevity penalty.
    assert bleu1("the the the", ["the cat"]) == pytest.approx(1 / 3)


def test_bleu1_brevity_penalty():
    # Shorter candidate than reference gets exp(1 - r/c).
    assert bleu1("a b", ["a b c d"]) == pytest.approx(1.0 * math.exp(1 - 4 / 2))
    # Longer candidate: no penalty.
    assert bleu1("a b c d", ["a b"]) == pytest.approx(2 / 4)


def test_bleu1_multiple_references_closest_length():
    # Both refs contain the tokens; closest length (tie -> shorter) decides BP.
    assert bleu1("a b c", ["a b c", "a b c d e"]) == 1.0


# ---------------------------------------------------------------------------
# ROUGE
# ---------------------------------------------------------------------------

def test_rouge_identical():
    assert rouge("x y z", "x y z", "rouge1") == 1.0
    assert rouge("x y z", "x y z", "rougeL") == 1.0


def test_rouge_l_hand_computed():
    # LCS("a b c d", "a c b d") has length 3 -> P = R = 3/4 -> F1 = 0.75.
    assert rouge("a b c d", "a c b d", "rougeL") == pytest.approx(0.75)


def test_rouge_disjoint_and_empty():
    assert rouge("a b", "x y", "rouge1") == 0.0
    assert rouge("a b", "", "rouge1") == 0.0
    assert rouge("", "a b", "rougeL") == 0.0


def test_rouge_variant_validation():
    with pytest.raises(ValueError):
        rouge("a", "a", "rouge2")


# ---------------------------------------------------------------------------
# METEOR
# ---------------------------------------------------------------------------

def test_meteor_identical_is_exactly_one():
    assert meteor("the trend is growing", "the trend is growing") == 1.0


def test_meteor_zero_matches():
    assert meteor("alpha beta", "gamma delta") == 0.0
    assert meteor("", "gamma") == 0.0


def test_meteor_reversed_is_strictly_below_one():
    score = meteor("a b c", "c b a")
    assert 0.0 < score < 1.0
    # Hand computation under the documented alignment: matches 3, chunks 3.
    expected = 1.0 * (1 - 0.5 * ((3 - 1) / 3) ** 3)
    assert score == pytest.approx(expected)


def test_meteor_stem_stage_matches():
    # "growing" vs "grows" only match through stemming.
    s = meteor("growing", "grows")
    assert s > 0.0


def test_meteor_recall_weighted():
    # Same matches; the one missing reference tokens (lower recall) hurts more
    # than the one with extra candidate tokens (lower precision).
    precision_low = meteor("a b c d", "a b")
    recall_low = meteor("a b", "a b c d")
    assert precision_low > recall_low


def test_meteor_alignment_is_leftmost_greedy():
    pairs = meteor_alignment(["a", "b"], ["b", "a", "b"])
    assert pairs == [(0, 1), (1, 0)]


def test_meteor_range_bounds():
    import numpy as np

    rng = np.random.default_rng(0)
    vocab = ["a", "b", "c", "grows", "growing", "fell"]
    for _ in range(200):
        cand = " ".join(rng.choice(vocab, size=rng.integers(0, 7)))
        ref = " ".join(rng.choice(vocab, size=rng.integers(0, 7)))
        s = meteor(cand, ref)
        assert 0.0 <= s <= 1.0


# ---------------------------------------------------------------------------
# brute-force parity on a small exhaustive universe (fast version; the
# acceptance suite runs the full length <= 6 sweep)
# ---------------------------------------------------------------------------

def brute_bleu1(cand, refs):
    if not cand:
        return 0.0
    clipped = 0
    for w in set(cand):
        clipped += min(cand.count(w), max(r.count(w) for r in refs))
    if clipped == 0:
        return 0.0
    r = min((abs(len(r) - len(cand)), len(r)) for r in refs)[1]
    bp = 1.0 if len(cand) > r else math.exp(1 - r / len(cand))
    return clipped / len(cand) * bp


def brute_rouge1(cand, ref):
    if not cand or not ref:
        return 0.0
    overlap = sum(min(cand.count(w), ref.count(w)) for w in set(cand))
    p, r = overlap / len(cand), overlap / len(ref)
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def brute_lcs(a, b):
    best = 0
    for k in range(len(a), 0, -1):
        for idx in itertools.combinations(range(len(a)), k):
            sub = [a[i] for i in idx]
            it = iter(b)
            if all(tok in it for tok in sub):
                return k
    return best


def brute_rougeL(cand, ref):
    if not cand or not ref:
        return 0.0
    overlap = brute_lcs(cand, ref)
    p, r = overlap / len(cand), overlap / len(ref)
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def test_brute_force_parity_small():
    alphabet = ("a", "b", "c")
    seqs = []
    for n in range(0, 5):
        seqs.extend(itertools.product(alphabet, repeat=n))
    import random

    rng = random.Random(4)
    sample = rng.sample([(c, r) for c in seqs for r in seqs], 4000)
    for cand, ref in sample:
        cs, rs = " ".join(cand), " ".join(ref)
        assert bleu1(cs, [rs]) == pytest.approx(brute_bleu1(list(cand), [list(ref)]), abs=1e-12)
        assert rouge(cs, rs, "rouge1") == pytest.approx(brute_rouge1(list(cand), list(ref)), abs=1e-12)
        assert rouge(cs, rs, "rougeL") == pytest.approx(brute_rougeL(list(cand), list(ref)), abs=1e-12)


# ---------------------------------------------------------------------------
# classification report
# ---------------------------------------------------------------------------

def test_classification_perfect():
    report = classification_report([0, 1, 2, 1], [0, 1, 2, 1])
    assert report.f1_macro == 1.0
    assert report.accuracy == 1.0


def test_classification_hand_computed_confusion():
    # Confusion [[1, 1], [0, 2]]: gold class 0 -> one right, one predicted 1.
    pred = [0, 1, 1, 1]
    gold = [0, 0, 1, 1]
    report = classification_report(pred, gold)
    assert report.confusion == ((1, 1), (0, 2))
    assert report.precision == (1.0, float(Fraction(2, 3)))
    assert report.recall == (0.5, 1.0)
    assert report.f1 == (float(Fraction(2, 3)), 0.8)
    assert report.f1_macro == float(Fraction(11, 15))  # (2/3 + 4/5) / 2
    assert report.accuracy == 0.75


def test_classification_all_one_class_on_balanced_gold():
    pred = [0, 0, 0, 0]
    gold = [0, 1, 0, 1]
    report = classification_report(pred, gold)
    # Class 0: P = 1/2, R = 1 -> F1 = 2/3; class 1: all zero.
    assert report.f1_macro == float(Fraction(1, 3))


def test_classification_zero_conventions():
    report = classification_report([1, 1], [0, 0], num_classes=3)
    assert report.precision == (0.0, 0.0, 0.0)
    assert report.recall == (0.0, 0.0, 0.0)
    assert report.f1_macro == 0.0
    assert report.accuracy == 0.0


def test_classification_validation():
    with pytest.raises(ValueError):
        classification_report([0, 1], [0])
    with pytest.raises(ValueError):
        classification_report([0, 5], [0, 1], num_classes=2)
    with pytest.raises(ValueError):
        classification_report([], [])


def test_classification_row_sums_are_support():
    report = classification_report([0, 1, 2, 2, 0], [0, 0, 2, 1, 2])
    assert report.support == (2, 1, 2)


def test_f1_macro_invariant_under_relabeling():
    import numpy as np

    rng = np.random.default_rng(12)
    gold = rng.integers(0, 4, size=200).tolist()
    pred = rng.integers(0, 4, size=200).tolist()
    base = classification_report(pred, gold, num_classes=4)
    perm = [2, 3, 1, 0]
    relabeled = classification_report(
        [perm[p] for p in pred], [perm[g] for g in gold], num_classes=4
    )
    assert relabeled.f1_macro == pytest.approx(base.f1_macro, abs=1e-12)
    assert relabeled.accuracy == pytest.approx(base.accuracy, abs=1e-12)


def test_classification_matches_sklearn():
    sklearn_metrics = pytest.importorskip("sklearn.metrics")
    import numpy as np

    rng = np.random.default_rng(3)
    gold = rng.integers(0, 5, size=300).tolist()
    pred = rng.integers(0, 5, size=300).tolist()
    mine = classification_report(pred, gold, num_classes=5)
    assert mine.f1_macro == pytest.approx(
        sklearn_metrics.f1_score(gold, pred, average="macro", zero_division=0), abs=1e-12
    )
    assert mine.accuracy == pytest.approx(
        sklearn_metrics.accuracy_score(gold, pred), abs=1e-12
    )
    for i in range(5):
        assert mine.precision[i] == pytest.approx(
            sklearn_metrics.precision_score(gold, pred, labels=[i], average="macro", zero_division=0),
            abs=1e-12,
        )


# ---------------------------------------------------------------------------
# corpus report
# ---------------------------------------------------------------------------

def test_score_text_pairs_means_and_report_shape():
    pairs = [("p1", "a b c", "a b c"), ("p2", "a b", "x y")]
    report = score_text_pairs(pairs)
    assert report.bleu1 == pytest.approx(0.5)
    d = report.to_json_dict()
    assert d["num_pairs"] == 2
    assert d["scores_x100"]["bleu1"] == pytest.approx(50.0)
    assert "tokenizer" in d["settings"]


def test_rouge_equals_one_iff_sequences_match():
    import itertools as it

    seqs = []
    for n in range(0, 4):
        seqs.extend(it.product(("a", "b"), repeat=n))
    for cand in seqs:
        for ref in seqs:
            cs, rs = " ".join(cand), " ".join(ref)
            r1 = rouge(cs, rs, "rouge1")
            rl = rouge(cs, rs, "rougeL")
            assert 0.0 <= r1 <= 1.0 and 0.0 <= rl <= 1.0
            # Unigram variant saturates exactly on multiset equality,
            # LCS variant exactly on sequence equality.
            from collections import Counter

            if cand and ref:
                assert (r1 == 1.0) == (Counter(cand) == Counter(ref))
                assert (rl == 1.0) == (list(cand) == list(ref))
            else:
                assert r1 == 0.0 and rl == 0.0
