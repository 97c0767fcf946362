"""Chat-completion gateway with http, mock, and record/replay backends.

All prompting stages talk to one interface: build a ChatExchange, call
complete(), get an LlmOutcome. The http backend speaks the common
chat-completions JSON wire shape with retry and a sliding-window rate
limit; the mock backend answers from a substring rule table; the replay
backend serves recorded responses keyed by a canonical request hash, so
pipelines re-run byte-identically with zero network calls.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
import urllib.error
import urllib.request
from collections import deque
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, NamedTuple

log = logging.getLogger(__name__)

# Markers that identify a moderation block in an error body.
_POLICY_MARKERS = ("content_policy", "content_filter", "content management policy", "moderation")

DEFAULT_REFUSAL_PHRASES = ("i cannot", "i can't", "i am sorry", "i'm sorry")

Transport = Callable[[str, dict, dict, float], tuple[int, object]]


class ReplayMissError(LookupError):
    """A replay lookup found no recorded response for the request hash."""

    def __init__(self, digest: str):
        super().__init__(f"no recorded response for request hash {digest}")
        self.digest = digest


class TokenUsage(NamedTuple):
    prompt: int
    completion: int


@dataclass(frozen=True)
class ChatExchange:
    """System message, demonstration turns, and the final user query.

    turns alternate user/assistant starting with user, i.e. demonstrations
    come in complete pairs.
    """

    system: str
    turns: tuple[tuple[str, str], ...] = ()
    query: str = ""
    reply: str | None = None

    def __post_init__(self) -> None:
        for i, (role, _content) in enumerate(self.turns):
            expected = "user" if i % 2 == 0 else "assistant"
            if role != expected:
                raise ValueError(f"turn {i} must have role {expected!r}, got {role!r}")
        if len(self.turns) % 2 != 0:
            raise ValueError("demonstration turns must come in complete user/assistant pairs")

    def messages(self) -> list[dict[str, str]]:
        """Wire-shape messages array: system, demonstrations, query."""
        msgs = [{"role": "system", "content": self.system}]
        msgs.extend({"role": role, "content": content} for role, content in self.turns)
        msgs.append({"role": "user", "content": self.query})
        return msgs

    def with_reply(self, text: str) -> "ChatExchange":
        return replace(self, reply=text)


@dataclass
class BackendConfig:
    """How to reach (or fake) the model.

    kind selects the backend: "http" for a live endpoint, "mock" for the
    scripted rule table, "replay" for the response cache. record=True makes
    live backends append every outcome to cache_path for later replay.
    """

    kind: str = "mock"
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model_name: str = "mock-model"
    max_tokens: int = 256
    temperature: float = 0.0
    max_retries: int = 2
    requests_per_minute: int = 60
    cache_path: str | None = None
    record: bool = False
    api_key_env: str = "OPENAI_API_KEY"
    timeout: float = 30.0
    mock_rules: tuple[tuple[str, str], ...] = ()
    mock_default: str = "[]"
    refusal_phrases: tuple[str, ...] = DEFAULT_REFUSAL_PHRASES

    def __post_init__(self) -> None:
        if self.kind not in ("http", "mock", "replay"):
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.kind == "replay" and not self.cache_path:
            raise ValueError("replay backend requires cache_path")


@dataclass
class LlmOutcome:
    """Result of one completion attempt.

    status "ok" means a nonempty reply came back; whether it parses is the
    caller's judgement. "refused" marks moderation blocks, "transport_error"
    exhausted retries, and "unparseable" is set by callers after parsing.
    """

    status: str
    text: str = ""
    token_usage: TokenUsage = TokenUsage(0, 0)


def canonical_request_hash(exchange: ChatExchange, model_name: str) -> str:
    """Stable hex digest of (system, turns, query, model) across runs and platforms."""
    payload = {
        "model": model_name,
        "system": exchange.system,
        "turns": [[role, content] for role, content in exchange.turns],
        "query": exchange.query,
    }
    blob = json.dumps(payload, sort_keys=True, ensure_ascii=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _approx_tokens(text: str) -> int:
    return len(text.split())


def _usage_estimate(exchange: ChatExchange, reply: str) -> TokenUsage:
    prompt = sum(_approx_tokens(m["content"]) for m in exchange.messages())
    return TokenUsage(prompt=prompt, completion=_approx_tokens(reply))


class RateLimiter:
    """Sliding-window limiter: at most `per_minute` acquisitions per 60 s.

    Clock and sleep are injectable so tests can drive it deterministically.
    """

    def __init__(self, per_minute: int, clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        if per_minute < 1:
            raise ValueError("requests_per_minute must be >= 1")
        self.per_minute = per_minute
        self._clock = clock
        self._sleep = sleep
        self._stamps: deque[float] = deque()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock()
                while self._stamps and now - self._stamps[0] >= 60.0:
                    self._stamps.popleft()
                if len(self._stamps) < self.per_minute:
                    self._stamps.append(now)
                    return
                wait = 60.0 - (now - self._stamps[0])
            self._sleep(max(wait, 0.0))


def _urllib_transport(url: str, payload: dict, headers: dict, timeout: float) -> tuple[int, object]:
    """Default POST transport. Returns (status_code, parsed body or text)."""
    data = json.dumps(payload).encode("utf-8")
    request = urllib.request.Request(url, data=data, headers=headers, method="POST")
    try:
        with urllib.request.urlopen(request, timeout=timeout) as response:
            body = response.read().decode("utf-8", errors="replace")
            status = response.status
    except urllib.error.HTTPError as exc:
        body = exc.read().decode("utf-8", errors="replace")
        status = exc.code
    try:
        return status, json.loads(body)
    except json.JSONDecodeError:
        return status, body


class LlmGateway:
    """One configured backend plus its rate limiter, cache, and usage totals.

    Safe for concurrent complete() calls: the limiter, the cache writer,
    and the usage counters serialize internally.
    """

    def __init__(self, cfg: BackendConfig, transport: Transport | None = None,
                 clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        self.cfg = cfg
        self.transport = transport or _urllib_transport
        self._sleep = sleep
        self._limiter = RateLimiter(cfg.requests_per_minute, clock=clock, sleep=sleep)
        self._cache_lock = threading.Lock()
        self._usage_lock = threading.Lock()
        self._replay_index: dict[str, dict] | None = None
        self.total_usage = TokenUsage(0, 0)

    # -- public API ---------------------------------------------------------

    def complete(self, exchange: ChatExchange) -> LlmOutcome:
        if self.cfg.kind == "replay":
            outcome = self._complete_replay(exchange)
        elif self.cfg.kind == "mock":
            outcome = self._complete_mock(exchange)
            self._maybe_record(exchange, outcome)
        else:
            outcome = self._complete_http(exchange)
            self._maybe_record(exchange, outcome)
        with self._usage_lock:
            self.total_usage = TokenUsage(
                self.total_usage.prompt + outcome.token_usage.prompt,
                self.total_usage.completion + outcome.token_usage.completion,
            )
        return outcome

    # -- mock ---------------------------------------------------------------

    def _complete_mock(self, exchange: ChatExchange) -> LlmOutcome:
        query = exchange.query.lower()
        reply = self.cfg.mock_default
        for needle, scripted in self.cfg.mock_rules:
            if needle.lower() in query:
                reply = scripted
                break
        if self._is_refusal_text(reply):
            return LlmOutcome("refused", reply, _usage_estimate(exchange, reply))
        return LlmOutcome("ok", reply, _usage_estimate(exchange, reply))

    # -- replay -------------------------------------------------------------

    def _load_replay_index(self) -> dict[str, dict]:
        if self._replay_index is None:
            index: dict[str, dict] = {}
            path = Path(self.cfg.cache_path)
            if path.exists():
                with open(path, encoding="utf-8") as f:
                    for line in f:
                        if not line.strip():
                            continue
                        entry = json.loads(line)
                        index[entry["hash"]] = entry
            self._replay_index = index
        return self._replay_index

    def _complete_replay(self, exchange: ChatExchange) -> LlmOutcome:
        digest = canonical_request_hash(exchange, self.cfg.model_name)
        entry = self._load_replay_index().get(digest)
        if entry is None:
            raise ReplayMissError(digest)
        response = entry["response"]
        usage = response.get("usage", {})
        return LlmOutcome(
            status=response["status"],
            text=response["text"],
            token_usage=TokenUsage(usage.get("prompt", 0), usage.get("completion", 0)),
        )

    def _maybe_record(self, exchange: ChatExchange, outcome: LlmOutcome) -> None:
        if not (self.cfg.record and self.cfg.cache_path):
            return
        entry = {
            "hash": canonical_request_hash(exchange, self.cfg.model_name),
            "model": self.cfg.model_name,
            "request": {
                "system": exchange.system,
                "turns": [[role, content] for role, content in exchange.turns],
                "query": exchange.query,
            },
            "response": {
                "status": outcome.status,
                "text": outcome.text,
                "usage": {
                    "prompt": outcome.token_usage.prompt,
                    "completion": outcome.token_usage.completion,
                },
            },
            "timestamp": time.time(),
        }
        with self._cache_lock:
            with open(self.cfg.cache_path, "a", encoding="utf-8") as f:
                f.write(json.dumps(entry, sort_keys=True, ensure_ascii=True) + "\n")

    # -- http ---------------------------------------------------------------

    def _is_refusal_text(self, text: str) -> bool:
        lowered = text.strip().lower()
        return any(lowered.startswith(phrase) for phrase in self.cfg.refusal_phrases)

    @staticmethod
    def _is_policy_block(body: object) -> bool:
        blob = json.dumps(body).lower() if isinstance(body, (dict, list)) else str(body).lower()
        return any(marker in blob for marker in _POLICY_MARKERS)

    def _complete_http(self, exchange: ChatExchange) -> LlmOutcome:
        payload = {
            "model": self.cfg.model_name,
            "messages": exchange.messages(),
            "temperature": self.cfg.temperature,
            "max_tokens": self.cfg.max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.cfg.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"

        last_error = "no attempt made"
        for attempt in range(self.cfg.max_retries + 1):
            if attempt:
                self._sleep(min(2.0 ** attempt, 30.0))
            self._limiter.acquire()
            try:
                status, body = self.transport(
                    self.cfg.endpoint, payload, headers, self.cfg.timeout
                )
            except Exception as exc:  # transport-level failure: retryable
                last_error = f"transport failure: {exc}"
                log.warning("completion attempt %d failed: %s", attempt + 1, last_error)
                continue
            if status == 200 and isinstance(body, dict):
                return self._parse_http_success(exchange, body)
            if status in (400, 403) and self._is_policy_block(body):
                return LlmOutcome("refused", "", TokenUsage(0, 0))
            if status == 429 or status >= 500:
                last_error = f"HTTP {status}"
                log.warning("completion attempt %d got %s, retrying", attempt + 1, last_error)
                continue
            return LlmOutcome("transport_error", f"HTTP {status}", TokenUsage(0, 0))
        return LlmOutcome("transport_error", last_error, TokenUsage(0, 0))

    def _parse_http_success(self, exchange: ChatExchange, body: dict) -> LlmOutcome:
        try:
            text = body["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError):
            return LlmOutcome("transport_error", "malformed completion body", TokenUsage(0, 0))
        usage = body.get("usage", {})
        tokens = TokenUsage(
            prompt=int(usage.get("prompt_tokens", 0)),
            completion=int(usage.get("completion_tokens", 0)),
        )
        if not tokens.prompt and not tokens.completion:
            tokens = _usage_estimate(exchange, text)
        if self._is_refusal_text(text):
            return LlmOutcome("refused", text, tokens)
        if not text.strip():
            return LlmOutcome("transport_error", "empty completion", tokens)
        return LlmOutcome("ok", text, tokens)


def complete(exchange: ChatExchange, cfg: BackendConfig,
             transport: Transport | None = None) -> LlmOutcome:
    """One-shot completion. For repeated calls build an LlmGateway so the
    rate limiter and replay index persist across requests."""
    return LlmGateway(cfg, transport=transport).complete(exchange)


def as_gateway(backend: "BackendConfig | LlmGateway") -> LlmGateway:
    """Accept either a config or a ready gateway; stages use this so tests
    can inject counting transports."""
    if isinstance(backend, LlmGateway):
        return backend
    return LlmGateway(backend)


def load_mock_rules(path: str | Path) -> tuple[tuple[str, str], ...]:
    """Read a mock rule table: JSON list of [substring, reply] pairs, or an
    object with "rules" and optional "default"."""
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    rules = data["rules"] if isinstance(data, dict) else data
    return tuple((str(needle), str(reply)) for needle, reply in rules)
