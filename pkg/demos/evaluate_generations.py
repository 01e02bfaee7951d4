"""Score generated trend descriptions: overlap metrics plus the verifier.

Renders a ground-truth answer, then progressively corrupts it and watches
the text metrics and the 1-5 verifier score respond.
"""

import numpy as np

from trendtext import (
    TemplateBank,
    TimeSeries,
    classification_report,
    render_trend_answer,
    segment_trends,
    verify_trend_text,
)
from trendtext.metrics import score_text_pairs

rng = np.random.default_rng(2)
series = TimeSeries(values=np.cumsum(rng.normal(size=30)).round(1),
                    sample_rate_hz=50.0, sensor_name="wrist x-axis accelerometer")
report = segment_trends(series)
bank = TemplateBank.default()
truth = render_trend_answer(report, bank, seed=0, sensor_name=series.sensor_name)

candidates = {
    "identical": truth,
    "one count off": truth.replace(": 1\n", ": 2\n", 1),
    "overall flipped": truth.replace("growing.", "declining.")
    if truth.rstrip().endswith("growing.")
    else truth.replace("declining.", "growing."),
    "prose only": "the sensor wiggled around for a while and then stopped",
}

print(f"{'candidate':<16}{'verifier':<12}{'BLEU-1':>8}{'ROUGE-L':>9}{'METEOR':>8}")
for name, text in candidates.items():
    verdict = verify_trend_text(text, report)
    scores = score_text_pairs([(name, text, truth)])
    print(f"{name:<16}{verdict.compact()[:10]:<12}"
          f"{100 * scores.bleu1:>8.1f}{100 * scores.rougeL:>9.1f}{100 * scores.meteor:>8.1f}")

# The classification side: per-class precision/recall/F1 and macro-F1.
gold = rng.integers(0, 3, size=40).tolist()
pred = [g if rng.random() < 0.8 else int(rng.integers(0, 3)) for g in gold]
cls = classification_report(pred, gold, num_classes=3)
print("\nclassification on noisy toy labels:")
for i in range(3):
    print(f"  class {i}: P={cls.precision[i]:.2f} R={cls.recall[i]:.2f} F1={cls.f1[i]:.2f}")
print(f"  macro-F1 {cls.f1_macro:.3f}, accuracy {cls.accuracy:.3f}")
