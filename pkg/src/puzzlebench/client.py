"""Chat-endpoint client with bounded retries, plus a deterministic
record/replay store so metric runs are reproducible offline."""

from __future__ import annotations

import hashlib
import json
import os
import random
import threading
import time
from dataclasses import dataclass, field
from typing import Optional

import requests

from .core import Environment, EvalRecord, PuzzleInstance, Verdict, classify
from .parsing import ParseFailure

RETRIABLE_STATUSES = frozenset({429, 500, 502, 503, 504})
MAX_ATTEMPTS = 5


class EpisodeError(Exception):
    """Harness-level failure (network, provider, replay miss). Episodes that
    raise this are excluded from Pass/Fail/Collapse denominators."""


@dataclass(frozen=True)
class ModelRequest:
    endpoint_url: str
    model_id: str
    system_text: str
    user_text: str
    max_tokens: int
    temperature: float
    timeout_s: int = 120
    api_key_env: str = ""
    extra_body: Optional[dict] = None


@dataclass(frozen=True)
class ModelResponse:
    text: str
    finish_reason: str
    prompt_tokens: int
    completion_tokens: int
    latency_ms: int

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "finish_reason": self.finish_reason,
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
            "latency_ms": self.latency_ms,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelResponse":
        return cls(
            text=d["text"],
            finish_reason=d["finish_reason"],
            prompt_tokens=d["prompt_tokens"],
            completion_tokens=d["completion_tokens"],
            latency_ms=d["latency_ms"],
        )


def replay_key(request: ModelRequest) -> str:
    """Digest of the decoding-relevant request fields; one stored record per key."""
    payload = json.dumps(
        {
            "model_id": request.model_id,
            "system_text": request.system_text,
            "user_text": request.user_text,
            "max_tokens": request.max_tokens,
            "temperature": request.temperature,
        },
        separators=(",", ":"),
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ReplayStore:
    """Append-only JSON Lines store keyed by replay_key; first write wins.
    Writes are serialized through one lock; reads are lock-free after load."""

    def __init__(self, path):
        self.path = str(path)
        self._records = {}
        self._lock = threading.Lock()
        if os.path.exists(self.path):
            with open(self.path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    obj = json.loads(line)
                    self._records.setdefault(obj["replay_key"], obj)

    def __len__(self):
        return len(self._records)

    def get(self, key: str) -> Optional[ModelResponse]:
        obj = self._records.get(key)
        return ModelResponse.from_dict(obj["response"]) if obj else None

    def put(self, key: str, request: ModelRequest, response: ModelResponse) -> bool:
        """Store a record unless the key exists; returns True when written."""
        with self._lock:
            if key in self._records:
                return False
            obj = {
                "replay_key": key,
                "request": {
                    "model_id": request.model_id,
                    "system_text": request.system_text,
                    "user_text": request.user_text,
                    "max_tokens": request.max_tokens,
                    "temperature": request.temperature,
                },
                "response": response.to_dict(),
                "timestamp": time.time(),
            }
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(obj, separators=(",", ":"), ensure_ascii=False) + "\n")
            self._records[key] = obj
            return True


class ModelClient:
    """Queries chat endpoints in live, record, or replay mode."""

    def __init__(
        self,
        mode: str = "live",
        store: Optional[ReplayStore] = None,
        max_attempts: int = MAX_ATTEMPTS,
        backoff_base: float = 0.5,
        backoff_cap: float = 30.0,
        rng: Optional[random.Random] = None,
        sleep=time.sleep,
    ):
        if mode not in ("live", "record", "replay"):
            raise ValueError(f"unknown client mode {mode!r}")
        if mode in ("record", "replay") and store is None:
            raise ValueError(f"mode {mode!r} requires a replay store")
        self.mode = mode
        self.store = store
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.backoff_cap = backoff_cap
        self.rng = rng or random.Random()
        self.sleep = sleep
        self.telemetry = {"requests": 0, "retries": 0, "replay_hits": 0, "records_written": 0}
        self._lock = threading.Lock()

    def complete(self, request: ModelRequest) -> ModelResponse:
        key = replay_key(request)
        if self.mode in ("record", "replay"):
            hit = self.store.get(key)
            if hit is not None:
                with self._lock:
                    self.telemetry["replay_hits"] += 1
                return hit
            if self.mode == "replay":
                raise EpisodeError(f"replay miss for key {key}")
        response = self._post(request)
        if self.mode == "record":
            if self.store.put(key, request, response):
                with self._lock:
                    self.telemetry["records_written"] += 1
            else:  # lost a write race; serve the stored record
                response = self.store.get(key)
        return response

    def _post(self, request: ModelRequest) -> ModelResponse:
        body = {
            "model": request.model_id,
            "messages": [
                {"role": "system", "content": request.system_text},
                {"role": "user", "content": request.user_text},
            ],
            "max_tokens": request.max_tokens,
            "temperature": request.temperature,
        }
        if request.extra_body:
            body.update(request.extra_body)
        headers = {"Content-Type": "application/json"}
        if request.api_key_env:
            key = os.environ.get(request.api_key_env, "")
            if key:
                headers["Authorization"] = f"Bearer {key}"
        last_error = None
        for attempt in range(self.max_attempts):
            if attempt:
                with self._lock:
                    self.telemetry["retries"] += 1
                delay = min(self.backoff_cap, self.backoff_base * (2 ** (attempt - 1)))
                self.sleep(delay * (0.5 + self.rng.random()))
            with self._lock:
                self.telemetry["requests"] += 1
            started = time.monotonic()
            try:
                resp = requests.post(
                    request.endpoint_url, json=body, headers=headers, timeout=request.timeout_s
                )
            except requests.RequestException as exc:
                last_error = f"network error: {exc}"
                continue
            latency_ms = int((time.monotonic() - started) * 1000)
            if resp.status_code in RETRIABLE_STATUSES:
                last_error = f"retriable status {resp.status_code}"
                continue
            if resp.status_code != 200:
                raise EpisodeError(f"endpoint returned status {resp.status_code}")
            try:
                payload = resp.json()
                choice = payload["choices"][0]
                usage = payload.get("usage", {})
                return ModelResponse(
                    text=choice["message"]["content"] or "",
                    finish_reason=choice.get("finish_reason", "stop") or "stop",
                    prompt_tokens=int(usage.get("prompt_tokens", 0)),
                    completion_tokens=int(usage.get("completion_tokens", 0)),
                    latency_ms=latency_ms,
                )
            except (KeyError, IndexError, TypeError, ValueError) as exc:
                raise EpisodeError(f"malformed provider reply: {exc}") from exc
        raise EpisodeError(f"request failed after {self.max_attempts} attempts: {last_error}")


def evaluate_text(
    env: Environment, instance: PuzzleInstance, raw_text: str, finish_reason: str
) -> Verdict:
    """The pure (raw_text, instance, finish_reason) -> Verdict function used
    both for live episodes and for re-validating stored records."""
    parsed = env.parse(raw_text)
    if isinstance(parsed, ParseFailure):
        return classify(parsed, None, finish_reason)
    validation = env.validate(instance, parsed)
    return classify(parsed, list(validation.violations), finish_reason)


def run_episode(
    env: Environment,
    instance: PuzzleInstance,
    request: ModelRequest,
    client: ModelClient,
) -> EvalRecord:
    """Render the env's fixed template, query the model, parse, validate, and
    classify into one EvalRecord."""
    system_text, user_text = env.render_prompt(instance)
    request = ModelRequest(
        endpoint_url=request.endpoint_url,
        model_id=request.model_id,
        system_text=system_text,
        user_text=user_text,
        max_tokens=request.max_tokens,
        temperature=request.temperature,
        timeout_s=request.timeout_s,
        api_key_env=request.api_key_env,
        extra_body=request.extra_body,
    )
    response = client.complete(request)
    verdict = evaluate_text(env, instance, response.text, response.finish_reason)
    return EvalRecord(
        model_id=request.model_id,
        instance_id=instance.instance_id,
        raw_text=response.text,
        verdict=verdict,
        prompt_tokens=response.prompt_tokens,
        completion_tokens=response.completion_tokens,
        latency_ms=response.latency_ms,
        finish_reason=response.finish_reason,
    )
