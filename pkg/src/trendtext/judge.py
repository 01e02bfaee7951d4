"""Client for scoring generated descriptions with a remote chat model.

Prompts are byte-stable: identical inputs always produce identical prompt
strings (audited by golden-file tests). Replies must carry a leading
integer score and a reason separated by the first "#"; reasons may contain
further "#" characters.

Two transports share one interface: a real HTTP chat-completions client
with exponential backoff on transient failures, and a cassette transport
replaying recorded responses from a JSONL file keyed by a sha256 of the
request payload, so the full pipeline runs with no network or key.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

from .core import TimeSeries
from .trends import format_hz

EVAL_PROMPT_TEMPLATE = (
    "Please evaluate the model-generated trend descriptions against the ground truth. "
    "Rate each pair based on the degree of accuracy, using a scale from 1 to 5, where "
    "1 represents the lowest correctness and 5 represents the highest. Deduct 1 point "
    "for minor errors in the trend description, and 2-3 points for moderate errors.\n"
    "\n"
    'Provide your score (1-5) and a brief explanation in the format: "score#reason" '
    "(e.g., 4#The description of trend changes slightly differs from the ground truth).\n"
    "\n"
    "Now, please proceed to score the following:\n"
    "Model: {model_output}\n"
    "Human: {ground_truth}\n"
    "Output:"
)

GEN_PROMPT_TEMPLATE = (
    "A dialogue between a curious researcher and an AI assistant. The AI analyzes a "
    "sensor time-series dataset ({n} points, {sample_rate}Hz sampling rate) to answer "
    "specific questions.\n"
    "\n"
    "Please output your answer in the format like this example:\n"
    "{exemplar}\n"
    "\n"
    "Now, analyze the following:\n"
    "Input: {sensor_data} How trends in the given sensor data evolve?\n"
    "Output:"
)


class JudgeError(RuntimeError):
    pass


class JudgeParseError(JudgeError):
    """Reply not in "score#reason" form; carries the raw text."""

    def __init__(self, message: str, raw: str):
        super().__init__(message)
        self.raw = raw


class JudgeTransportError(JudgeError):
    pass


@dataclass(frozen=True)
class JudgeConfig:
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model: str = "gpt-4o"
    api_key_env: str = "TRENDTEXT_JUDGE_API_KEY"
    timeout_s: float = 30.0
    max_retries: int = 3
    backoff_base_s: float = 1.0
    temperature: float = 0.0
    concurrency: int = 4

    def __post_init__(self) -> None:
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.concurrency < 1:
            raise ValueError("concurrency must be >= 1")


@dataclass(frozen=True)
class JudgeResult:
    score: int
    reason: str
    raw: str
    temperature: float = 0.0

    def to_json_dict(self) -> dict:
        return {
            "score": self.score,
            "reason": self.reason,
            "raw": self.raw,
            "temperature": self.temperature,
        }


def build_eval_prompt(model_output: str, ground_truth: str) -> str:
    if not model_output:
        raise ValueError("model_output must be non-empty")
    if not ground_truth:
        raise ValueError("ground_truth must be non-empty")
    return EVAL_PROMPT_TEMPLATE.format(model_output=model_output, ground_truth=ground_truth)


def serialize_readings(values: Sequence[float]) -> str:
    """Bracketed list using each float's shortest round-trip repr, so values
    read from text serialize back at the precision they were read with."""
    return "[" + ", ".join(repr(float(v)) for v in values) + "]"


def build_gen_prompt(readings: TimeSeries, exemplar: str) -> str:
    return GEN_PROMPT_TEMPLATE.format(
        n=len(readings),
        sample_rate=format_hz(readings.sample_rate_hz),
        exemplar=exemplar,
        sensor_data=serialize_readings(readings.values),
    )


def parse_judge_reply(text: str, temperature: float = 0.0) -> JudgeResult:
    """Split "<int>#<reason>" at the first "#"; score must be in 1..5."""
    raw = text
    stripped = text.strip()
    head, sep, reason = stripped.partition("#")
    if not sep:
        raise JudgeParseError(f"no '#' separator in judge reply: {stripped!r}", raw)
    head = head.strip()
    try:
        score = int(head)
    except ValueError:
        raise JudgeParseError(f"judge reply score {head!r} is not an integer", raw)
    if not 1 <= score <= 5:
        raise JudgeParseError(f"judge reply score {score} outside 1..5", raw)
    return JudgeResult(score=score, reason=reason.strip(), raw=raw, temperature=temperature)


def build_request_payload(prompt: str, cfg: JudgeConfig) -> dict:
    return {
        "model": cfg.model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": cfg.temperature,
    }


def request_fingerprint(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def reply_text(response_body: dict) -> str:
    try:
        return response_body["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError):
        raise JudgeTransportError(f"chat response missing message content: {response_body!r}")


class Transport(Protocol):
    def send(self, payload: dict, cfg: JudgeConfig) -> dict: ...


class HttpTransport:
    """POSTs to a chat-completions-compatible endpoint via requests.

    Retries with exponential backoff on connection errors, timeouts, 429
    and 5xx; other HTTP errors surface immediately with their status.
    """

    # Injection point for tests.
    _sleep = staticmethod(time.sleep)

    def send(self, payload: dict, cfg: JudgeConfig) -> dict:
        import requests

        api_key = os.environ.get(cfg.api_key_env)
        if not api_key:
            raise JudgeTransportError(
                f"no API key found in environment variable {cfg.api_key_env!r}"
            )
        headers = {"Authorization": f"Bearer {api_key}", "Content-Type": "application/json"}
        last_error: Exception | None = None
        for attempt in range(cfg.max_retries + 1):
            try:
                response = requests.post(
                    cfg.endpoint, json=payload, headers=headers, timeout=cfg.timeout_s
                )
            except (requests.ConnectionError, requests.Timeout) as exc:
                last_error = exc
            else:
                if response.status_code == 200:
                    return response.json()
                if response.status_code == 429 or response.status_code >= 500:
                    last_error = JudgeTransportError(
                        f"HTTP {response.status_code} from {cfg.endpoint}"
                    )
                else:
                    raise JudgeTransportError(
                        f"HTTP {response.status_code} from {cfg.endpoint}: {response.text[:500]}"
                    )
            if attempt < cfg.max_retries:
                self._sleep(cfg.backoff_base_s * 2**attempt)
        raise JudgeTransportError(f"judge request failed after retries: {last_error}")


@dataclass
class CassetteTransport:
    """Replays recorded responses keyed by request fingerprint.

    Cassette format: JSONL, one {"request_sha256": ..., "response": {...}}
    per line. Useful both for offline test runs and for auditing exactly
    which requests a batch produced.
    """

    responses: dict[str, dict] = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: str | Path) -> "CassetteTransport":
        responses: dict[str, dict] = {}
        with open(path) as f:
            for lineno, line in enumerate(f, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                    responses[record["request_sha256"]] = record["response"]
                except (json.JSONDecodeError, KeyError) as exc:
                    raise JudgeTransportError(f"{path}:{lineno}: bad cassette record: {exc}")
        return cls(responses=responses)

    @staticmethod
    def record(payload: dict, content: str) -> dict:
        """One cassette line for a request/reply pair (used when recording)."""
        return {
            "request_sha256": request_fingerprint(payload),
            "response": {"choices": [{"message": {"role": "assistant", "content": content}}]},
        }

    def send(self, payload: dict, cfg: JudgeConfig) -> dict:
        key = request_fingerprint(payload)
        if key not in self.responses:
            raise JudgeTransportError(f"cassette has no response for request {key[:12]}…")
        return self.responses[key]


def judge_pair(
    model_output: str, ground_truth: str, cfg: JudgeConfig, transport: Transport
) -> JudgeResult:
    prompt = build_eval_prompt(model_output, ground_truth)
    payload = build_request_payload(prompt, cfg)
    body = transport.send(payload, cfg)
    return parse_judge_reply(reply_text(body), temperature=cfg.temperature)


def judge_many(
    pairs: Sequence[tuple[str, str, str]], cfg: JudgeConfig, transport: Transport
) -> dict[str, JudgeResult]:
    """Score (id, model_output, ground_truth) triples concurrently.

    In-flight requests are bounded by ``cfg.concurrency``; results are keyed
    by pair id so completion order is irrelevant.
    """
    import concurrent.futures

    results: dict[str, JudgeResult] = {}
    with concurrent.futures.ThreadPoolExecutor(max_workers=cfg.concurrency) as pool:
        futures = {
            pool.submit(judge_pair, output, truth, cfg, transport): pair_id
            for pair_id, output, truth in pairs
        }
        for future in concurrent.futures.as_completed(futures):
            results[futures[future]] = future.result()
    return results
