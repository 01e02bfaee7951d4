"""Judge generated descriptions offline via a recorded-response cassette.

The judge client normally POSTs to a chat-completions endpoint; a cassette
file replays recorded replies keyed by a hash of the request, so the whole
flow runs with no network and no API key.
"""

import json
import tempfile
from pathlib import Path

from trendtext.judge import (
    CassetteTransport,
    JudgeConfig,
    build_eval_prompt,
    build_request_payload,
    judge_many,
)

cfg = JudgeConfig(model="gpt-4o")

pairs = [
    ("good", "0.0s to 0.1s: growing", "0.0s to 0.1s: growing"),
    ("bad", "0.0s to 0.3s: flat the whole time", "0.0s to 0.1s: growing"),
]
replies = {
    "good": "5#The model's description matches the ground truth accurately.",
    "bad": "2#Significant discrepancies in segment durations and trend counts.",
}

# Record a cassette: one JSONL line per request fingerprint.
cassette_path = Path(tempfile.mkdtemp(prefix="trendtext_demo_")) / "cassette.jsonl"
with open(cassette_path, "w") as f:
    for pair_id, output, truth in pairs:
        payload = build_request_payload(build_eval_prompt(output, truth), cfg)
        f.write(json.dumps(CassetteTransport.record(payload, replies[pair_id])) + "\n")
print("cassette at", cassette_path)

# Replay it. Completion order does not matter; results are keyed by id.
transport = CassetteTransport.from_file(cassette_path)
results = judge_many(pairs, cfg, transport)
for pair_id in ("good", "bad"):
    r = results[pair_id]
    print(f"{pair_id}: score {r.score} — {r.reason} (temperature {r.temperature})")

assert results["good"].score == 5
assert results["bad"].score == 2
