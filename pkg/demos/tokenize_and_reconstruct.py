"""Turn a series into discrete tokens and back.

Shows mean scaling, bin assignment, the reserved special ids, and the
reconstruction error bound (half the center gap, times the scale).
"""

import numpy as np

from trendtext import TimeSeries, default_config, dequantize, mean_scale, quantize, tokenize_series

cfg = default_config()
print(f"quantizer: {cfg.num_bins} uniform bins on "
      f"[{cfg.bin_centers[0]}, {cfg.bin_centers[-1]}], pad={cfg.pad_token_id}, "
      f"eos={cfg.eos_token_id}")

rng = np.random.default_rng(11)
series = TimeSeries(values=rng.normal(scale=9.81, size=16), sample_rate_hz=50.0,
                    sensor_name="hip x-axis accelerometer")

scaled, scale = mean_scale(series)
print(f"\nmean(|x|) = {scale:.4f}; scaled values lie near [-3, 3]:")
print(" ", np.array2string(scaled.values, precision=3))

seq = quantize(scaled, cfg, scale=scale)
print("\ntoken ids (eos last):", list(seq.token_ids))

back = dequantize(seq, cfg)
err = np.abs(back.values - series.values)
bound = cfg.max_center_gap / 2 * scale
print(f"\nmax reconstruction error {err.max():.5f} <= bound {bound:.5f}")
assert err.max() <= bound + 1e-12

# One-call front-end, and the config serializes for self-describing corpora.
seq2 = tokenize_series(series, cfg)
assert seq2.token_ids == seq.token_ids
print("\nconfig JSON:", cfg.to_json_dict())
