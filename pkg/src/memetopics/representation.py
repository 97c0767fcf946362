"""Ten-word topic representations, from weights alone or via the model.

The direct route takes the ten heaviest c-TF-IDF words of a topic. The
prompted route shows the model the topic's top 100 weighted words and asks
it to pick the ten most related; any word it returns from outside that
candidate list is dropped (the model is told not to invent words, but
nothing enforces it), and the representation is backfilled from the weight
ranking so it stays full length. Refusals and unparseable replies fall
back to the direct route.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .ctfidf import CtfidfTable, top_words
from .generation import TopicParseError, format_topic_list, parse_topic_list
from .llm import BackendConfig, ChatExchange, LlmGateway, as_gateway

REPRESENTATION_SIZE = 10
CANDIDATE_POOL_SIZE = 100

WORDRANK_SYSTEM = (
    "You are designated as an AI assistant that given a list of words and a "
    "topic, determines the top 10 words related to the topic, without providing "
    "any words that are not included in the above list of words."
)

WORDRANK_QUESTION = "Given the above topic, list the top 10 words related to the topic."

WORDRANK_DEMO_TOPIC = "technology"
WORDRANK_DEMO_WORDS = (
    "singapore",
    "tracetogether",
    "computer",
    "robot",
    "google",
    "iphone",
    "airpods",
    "internet",
    "video",
    "tiktok",
    "phone",
    "app",
    "online",
    "wifi",
    "digital",
    "message",
)
WORDRANK_DEMO_ANSWER = (
    "computer",
    "robot",
    "google",
    "iphone",
    "airpods",
    "internet",
    "tracetogether",
    "video",
    "tiktok",
    "message",
)


@dataclass
class TopicRepresentation:
    """The ranked words standing for one topic.

    backfilled counts words restored from the weight ranking after the
    hallucination filter; dropped counts the filtered-out words. fallback
    marks representations that reverted to the direct route entirely.
    """

    topic: str
    words: list[str]
    method: str  # ctfidf | llm
    backfilled: int = 0
    dropped: int = 0
    fallback: bool = False


def represent_ctfidf(table: CtfidfTable, topic: str) -> TopicRepresentation:
    """Top ten weighted words of the class; fewer if the class is smaller."""
    ranked = top_words(table, topic, REPRESENTATION_SIZE)
    return TopicRepresentation(topic=topic, words=list(ranked.words), method="ctfidf")


def build_wordrank_prompt(topic: str, candidates: Sequence[str]) -> ChatExchange:
    """Word-ranking prompt: the topic, its numbered candidate words (most
    heavily weighted first), and the fixed question, after one worked
    example."""
    if not 1 <= len(candidates) <= CANDIDATE_POOL_SIZE:
        raise ValueError(f"candidate list must hold 1..{CANDIDATE_POOL_SIZE} words")

    def render(t: str, words: Sequence[str]) -> str:
        numbered = ", ".join(f"{i}. {w}" for i, w in enumerate(words, start=1))
        return f"Topic : '{t}'\nWords : {numbered}\n\n{WORDRANK_QUESTION}"

    turns = (
        ("user", render(WORDRANK_DEMO_TOPIC, WORDRANK_DEMO_WORDS)),
        ("assistant", format_topic_list(WORDRANK_DEMO_ANSWER)),
    )
    return ChatExchange(system=WORDRANK_SYSTEM, turns=turns, query=render(topic, candidates))


def represent_llm(
    topic: str,
    table: CtfidfTable,
    backend: BackendConfig | LlmGateway,
) -> TopicRepresentation:
    """Ask the model for the topic's ten most related candidate words.

    Out-of-list words are dropped and counted; shortfalls are backfilled
    from the weight ranking. A refusal or unparseable reply returns the
    direct representation with fallback=True.
    """
    gateway = as_gateway(backend)
    candidates = top_words(table, topic, CANDIDATE_POOL_SIZE).words

    def fallback() -> TopicRepresentation:
        rep = represent_ctfidf(table, topic)
        rep.fallback = True
        return rep

    if not candidates:  # degenerate cluster: every member document is empty
        return fallback()
    outcome = gateway.complete(build_wordrank_prompt(topic, candidates))
    if outcome.status != "ok":
        return fallback()
    try:
        replied = parse_topic_list(outcome.text)
    except TopicParseError:
        return fallback()

    by_key = {word.casefold(): word for word in candidates}
    kept: list[str] = []
    seen: set[str] = set()
    dropped = 0
    for word in replied:
        key = word.casefold()
        if key in seen:
            continue
        if key in by_key:
            kept.append(by_key[key])
            seen.add(key)
        else:
            dropped += 1
    kept = kept[:REPRESENTATION_SIZE]

    backfilled = 0
    if len(kept) < REPRESENTATION_SIZE:
        for word in candidates:
            if len(kept) == REPRESENTATION_SIZE:
                break
            if word.casefold() not in seen:
                kept.append(word)
                seen.add(word.casefold())
                backfilled += 1
    return TopicRepresentation(
        topic=topic, words=kept, method="llm", backfilled=backfilled, dropped=dropped
    )


def save_representations(reps: Iterable[TopicRepresentation], path: str | Path) -> None:
    payload = {
        rep.topic: {"words": rep.words, "method": rep.method, "backfilled": rep.backfilled}
        for rep in reps
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, sort_keys=True, ensure_ascii=True, indent=2)
        f.write("\n")


def load_representations(path: str | Path) -> list[TopicRepresentation]:
    with open(path, encoding="utf-8") as f:
        payload = json.load(f)
    return [
        TopicRepresentation(
            topic=topic,
            words=list(entry["words"]),
            method=entry["method"],
            backfilled=entry.get("backfilled", 0),
        )
        for topic, entry in sorted(payload.items())
    ]
