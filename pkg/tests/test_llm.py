"""Gateway behavior: wire shape, hashing, mock, replay, retry, rate limit."""

import json

import pytest

from memetopics.llm import (
    BackendConfig,
    ChatExchange,
    LlmGateway,
    RateLimiter,
    ReplayMissError,
    canonical_request_hash,
    complete,
    load_mock_rules,
)

from conftest import mock_backend


def exchange(query="hello", turns=()):
    return ChatExchange(system="be helpful", turns=turns, query=query)


DEMO_TURNS = (
    ("user", "first question"),
    ("assistant", "first answer"),
    ("user", "second question"),
    ("assistant", "second answer"),
)


class CountingTransport:
    """Scripted transport that records every call it receives."""

    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = []

    def __call__(self, url, payload, headers, timeout):
        self.calls.append(payload)
        if not self.responses:
            raise AssertionError("transport called more times than scripted")
        item = self.responses.pop(0)
        if isinstance(item, Exception):
            raise item
        return item


def http_body(text, prompt_tokens=12, completion_tokens=3):
    return {
        "choices": [{"message": {"role": "assistant", "content": text}}],
        "usage": {"prompt_tokens": prompt_tokens, "completion_tokens": completion_tokens},
    }


# -- exchange shape -----------------------------------------------------------


def test_turns_must_alternate_starting_with_user():
    with pytest.raises(ValueError):
        ChatExchange(system="s", turns=(("assistant", "a"),), query="q")
    with pytest.raises(ValueError):
        ChatExchange(system="s", turns=(("user", "u"),), query="q")  # incomplete pair


def test_messages_wire_shape():
    ex = exchange(query="q", turns=DEMO_TURNS[:2])
    messages = ex.messages()
    assert [m["role"] for m in messages] == ["system", "user", "assistant", "user"]
    assert messages[-1]["content"] == "q"


# -- canonical hash -----------------------------------------------------------


def test_hash_deterministic():
    assert canonical_request_hash(exchange(), "m") == canonical_request_hash(exchange(), "m")


def test_hash_changes_on_any_edit():
    base = canonical_request_hash(exchange("query text"), "m")
    assert canonical_request_hash(exchange("query texT"), "m") != base
    assert canonical_request_hash(exchange("query text"), "m2") != base


def test_hash_covers_demonstration_order():
    reordered = DEMO_TURNS[2:] + DEMO_TURNS[:2]
    a = canonical_request_hash(exchange(turns=DEMO_TURNS), "m")
    b = canonical_request_hash(exchange(turns=reordered), "m")
    assert a != b


# -- mock backend -------------------------------------------------------------


def test_mock_rule_matches_substring():
    cfg = mock_backend(rules=[("obama", "['Politics']")], default="['Other']")
    outcome = complete(exchange("a photo of obama outside"), cfg)
    assert outcome.status == "ok"
    assert outcome.text == "['Politics']"


def test_mock_is_pure_function_of_exchange():
    cfg = mock_backend(rules=[("x", "['X']")], default="['D']")
    first = complete(exchange("about x"), cfg)
    second = complete(exchange("about x"), cfg)
    assert (first.status, first.text, first.token_usage) == (
        second.status,
        second.text,
        second.token_usage,
    )


def test_mock_first_matching_rule_wins():
    cfg = mock_backend(rules=[("spec", "['First']"), ("s", "['Second']")])
    assert complete(exchange("specific"), cfg).text == "['First']"


def test_mock_scripted_refusal_detected():
    cfg = mock_backend(rules=[("nasty", "I cannot help with that request.")])
    outcome = complete(exchange("something nasty here"), cfg)
    assert outcome.status == "refused"


def test_mock_counts_tokens():
    cfg = mock_backend(default="['A', 'B']")
    outcome = complete(exchange("three word query"), cfg)
    assert outcome.token_usage.prompt > 0
    assert outcome.token_usage.completion == 2


# -- record / replay ----------------------------------------------------------


def test_record_then_replay_roundtrip(tmp_path):
    cache = tmp_path / "cache.jsonl"
    recording = mock_backend(
        rules=[("alpha", "['One']")], cache_path=str(cache), record=True
    )
    recorded = complete(exchange("query alpha"), recording)

    replaying = BackendConfig(kind="replay", model_name="mock-model", cache_path=str(cache))
    replayed = complete(exchange("query alpha"), replaying)
    assert replayed.status == recorded.status
    assert replayed.text == recorded.text
    assert replayed.token_usage == recorded.token_usage


def test_replay_makes_zero_network_calls(tmp_path):
    cache = tmp_path / "cache.jsonl"
    complete(
        exchange("anything"),
        mock_backend(default="['R']", cache_path=str(cache), record=True),
    )
    transport = CountingTransport([])
    cfg = BackendConfig(kind="replay", model_name="mock-model", cache_path=str(cache))
    outcome = LlmGateway(cfg, transport=transport).complete(exchange("anything"))
    assert outcome.text == "['R']"
    assert transport.calls == []


def test_replay_miss_names_hash(tmp_path):
    cache = tmp_path / "cache.jsonl"
    cache.write_text("", encoding="utf-8")
    cfg = BackendConfig(kind="replay", model_name="m", cache_path=str(cache))
    ex = exchange("never recorded")
    with pytest.raises(ReplayMissError) as err:
        complete(ex, cfg)
    assert canonical_request_hash(ex, "m") in str(err.value)


def test_replay_requires_cache_path():
    with pytest.raises(ValueError):
        BackendConfig(kind="replay")


def test_cache_entry_shape(tmp_path):
    cache = tmp_path / "cache.jsonl"
    cfg = mock_backend(default="['Z']", cache_path=str(cache), record=True)
    complete(exchange("shape check", turns=DEMO_TURNS[:2]), cfg)
    entry = json.loads(cache.read_text().splitlines()[0])
    assert set(entry) == {"hash", "model", "request", "response", "timestamp"}
    assert entry["request"]["query"] == "shape check"
    assert entry["response"]["status"] == "ok"


def test_recorded_refusal_replays_as_refusal(tmp_path):
    cache = tmp_path / "cache.jsonl"
    cfg = mock_backend(
        rules=[("bad", "I cannot help with that.")], cache_path=str(cache), record=True
    )
    complete(exchange("bad thing"), cfg)
    replay_cfg = BackendConfig(kind="replay", model_name="mock-model", cache_path=str(cache))
    assert complete(exchange("bad thing"), replay_cfg).status == "refused"


# -- http backend -------------------------------------------------------------


def http_cfg(**kwargs):
    kwargs.setdefault("kind", "http")
    kwargs.setdefault("model_name", "test-model")
    kwargs.setdefault("max_retries", 2)
    return BackendConfig(**kwargs)


def test_http_success_parses_text_and_usage():
    transport = CountingTransport([(200, http_body("['Sports']"))])
    gateway = LlmGateway(http_cfg(), transport=transport, sleep=lambda s: None)
    outcome = gateway.complete(exchange("a query"))
    assert outcome.status == "ok"
    assert outcome.text == "['Sports']"
    assert outcome.token_usage == (12, 3)
    payload = transport.calls[0]
    assert payload["model"] == "test-model"
    assert payload["messages"][0]["role"] == "system"
    assert payload["temperature"] == 0.0


def test_http_policy_block_is_refused():
    body = {"error": {"code": "content_policy_violation", "message": "blocked"}}
    transport = CountingTransport([(400, body)])
    gateway = LlmGateway(http_cfg(), transport=transport, sleep=lambda s: None)
    assert gateway.complete(exchange("profanity")).status == "refused"


def test_http_refusal_phrase_in_text():
    transport = CountingTransport([(200, http_body("I'm sorry, I can't describe that."))])
    gateway = LlmGateway(http_cfg(), transport=transport, sleep=lambda s: None)
    assert gateway.complete(exchange("q")).status == "refused"


def test_http_retries_then_succeeds():
    transport = CountingTransport([(503, "busy"), (200, http_body("ok text"))])
    gateway = LlmGateway(http_cfg(), transport=transport, sleep=lambda s: None)
    outcome = gateway.complete(exchange("q"))
    assert outcome.status == "ok"
    assert len(transport.calls) == 2


def test_http_exhausted_retries_is_transport_error():
    transport = CountingTransport([(500, "x"), (500, "x"), (500, "x")])
    gateway = LlmGateway(http_cfg(max_retries=2), transport=transport, sleep=lambda s: None)
    outcome = gateway.complete(exchange("q"))
    assert outcome.status == "transport_error"
    assert len(transport.calls) == 3  # initial try + 2 retries


def test_http_transport_exception_is_retried():
    transport = CountingTransport([OSError("boom"), (200, http_body("fine"))])
    gateway = LlmGateway(http_cfg(), transport=transport, sleep=lambda s: None)
    assert gateway.complete(exchange("q")).status == "ok"


def test_http_non_retryable_client_error():
    transport = CountingTransport([(404, "nope")])
    gateway = LlmGateway(http_cfg(), transport=transport, sleep=lambda s: None)
    outcome = gateway.complete(exchange("q"))
    assert outcome.status == "transport_error"
    assert len(transport.calls) == 1


def test_gateway_accumulates_usage():
    cfg = mock_backend(default="['A']")
    gateway = LlmGateway(cfg)
    gateway.complete(exchange("one two"))
    gateway.complete(exchange("three"))
    assert gateway.total_usage.completion == 2  # one token per reply


# -- rate limiter -------------------------------------------------------------


class FakeClock:
    def __init__(self):
        self.now = 0.0
        self.sleeps = []

    def time(self):
        return self.now

    def sleep(self, seconds):
        self.sleeps.append(seconds)
        self.now += seconds


def test_rate_limiter_bounds_any_60s_window():
    clock = FakeClock()
    limiter = RateLimiter(per_minute=5, clock=clock.time, sleep=clock.sleep)
    stamps = []
    for _ in range(12):
        limiter.acquire()
        stamps.append(clock.now)
        clock.now += 1.0  # one request per simulated second
    for i, start in enumerate(stamps):
        in_window = [t for t in stamps if start <= t < start + 60.0]
        assert len(in_window) <= 5
    assert clock.sleeps  # the limiter had to wait at least once


def test_rate_limiter_no_wait_under_limit():
    clock = FakeClock()
    limiter = RateLimiter(per_minute=100, clock=clock.time, sleep=clock.sleep)
    for _ in range(10):
        limiter.acquire()
    assert clock.sleeps == []


def test_http_calls_pass_through_limiter():
    clock = FakeClock()
    transport = CountingTransport([(200, http_body(f"reply {i}")) for i in range(4)])
    cfg = http_cfg(requests_per_minute=2)
    gateway = LlmGateway(cfg, transport=transport, clock=clock.time, sleep=clock.sleep)
    for _ in range(4):
        gateway.complete(exchange("q"))
    assert len(transport.calls) == 4
    assert clock.sleeps  # third and fourth call had to wait for the window


# -- rules file ---------------------------------------------------------------


def test_load_mock_rules_list_and_object(tmp_path):
    as_list = tmp_path / "rules1.json"
    as_list.write_text(json.dumps([["a", "['A']"]]), encoding="utf-8")
    assert load_mock_rules(as_list) == (("a", "['A']"),)

    as_object = tmp_path / "rules2.json"
    as_object.write_text(json.dumps({"rules": [["b", "['B']"]]}), encoding="utf-8")
    assert load_mock_rules(as_object) == (("b", "['B']"),)
