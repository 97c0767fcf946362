"""Per-meme topic generation: prompt construction, reply parsing, routing.

Each meme's caption and superimposed text go into a few-shot prompt whose
demonstrations teach the reply format (a bracketed quoted list of topic
labels). Replies that cannot be parsed route the meme to the reserved
Miscellaneous cluster; moderation refusals route it to Inappropriate. No
document is ever dropped.
"""

from __future__ import annotations

import ast
import json
import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Corpus, MemeDocument
from .llm import BackendConfig, ChatExchange, LlmGateway, as_gateway

MISCELLANEOUS = "Miscellaneous"
INAPPROPRIATE = "Inappropriate"
RESERVED_LABELS = frozenset({MISCELLANEOUS.casefold(), INAPPROPRIATE.casefold()})
# An LLM reply naming a reserved cluster is rewritten so failure buckets
# stay distinguishable from genuine labels.
RESERVED_COLLISION_LABEL = "Miscellaneous (generated)"

GENERATION_SYSTEM = (
    "You are designated as an assistant that identify and extract high-level "
    "topics from memes. You should avoid giving specific details and provide "
    "unique topics solely."
)

GENERATION_USER_TEMPLATE = (
    "Please list the high-level topics in the following meme using its image "
    "caption and superimposed text.\n"
    "Meme's Image Caption: {caption}\n"
    "Meme's Superimposed Text: {text}\n"
    "Topics:"
)

_QUOTED = re.compile(r"'([^']*)'|\"([^\"]*)\"")


class TopicParseError(ValueError):
    """The reply did not contain a usable topic list."""


@dataclass(frozen=True)
class Demonstration:
    caption: str
    overlay_text: str
    topics: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.topics:
            raise ValueError("a demonstration needs at least one topic")


@dataclass(frozen=True)
class DemonstrationSet:
    """Ordered in-context examples; n of them are prepended to every prompt."""

    items: tuple[Demonstration, ...]

    @property
    def n(self) -> int:
        return len(self.items)

    def take(self, n: int) -> "DemonstrationSet":
        """First n demonstrations, for ablations over the demonstration count."""
        if not 1 <= n <= len(self.items):
            raise ValueError(f"cannot take {n} demonstrations from a set of {len(self.items)}")
        return DemonstrationSet(items=self.items[:n])

    @classmethod
    def from_file(cls, path: str | Path) -> "DemonstrationSet":
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
        return cls._from_records(data)

    @classmethod
    def default(cls) -> "DemonstrationSet":
        """The bundled demonstration file (8 examples)."""
        text = resources.files("memetopics.data").joinpath("demonstrations.json").read_text("utf-8")
        return cls._from_records(json.loads(text))

    @classmethod
    def _from_records(cls, data: list) -> "DemonstrationSet":
        items = tuple(
            Demonstration(
                caption=record["caption"],
                overlay_text=record["text"],
                topics=tuple(record["topics"]),
            )
            for record in data
        )
        if not items:
            raise ValueError("demonstration file contains no examples")
        return cls(items=items)


@dataclass(frozen=True)
class TopicAssignment:
    """Topic labels for one document, or the failure bucket it landed in."""

    doc_id: str
    topics: tuple[str, ...]
    provenance: str  # generated | miscellaneous | inappropriate


def format_topic_list(topics: Sequence[str]) -> str:
    """Render labels the way demonstrations show them: ['A', 'B']."""
    quoted = ", ".join(f"'{t}'" for t in topics)
    return f"[{quoted}]"


def build_generation_prompt(doc: MemeDocument, demos: DemonstrationSet) -> ChatExchange:
    """Few-shot exchange for one meme: system rules, n demonstration pairs,
    then the meme's own caption/text as the final user turn."""
    if demos.n < 1:
        raise ValueError("at least one demonstration is required")
    turns: list[tuple[str, str]] = []
    for demo in demos.items:
        turns.append(
            ("user", GENERATION_USER_TEMPLATE.format(caption=demo.caption, text=demo.overlay_text))
        )
        turns.append(("assistant", format_topic_list(demo.topics)))
    query = GENERATION_USER_TEMPLATE.format(caption=doc.caption, text=doc.overlay_text)
    return ChatExchange(system=GENERATION_SYSTEM, turns=tuple(turns), query=query)


def parse_topic_list(reply: str) -> list[str]:
    """Parse a bracketed quoted list of labels out of a model reply.

    Tolerates either quote style, stray whitespace, and prose around the
    brackets. Labels are trimmed and deduplicated case-insensitively,
    keeping the first-seen casing. Raises TopicParseError for prose without
    a list, an empty list, or unmatched brackets.
    """
    start = reply.find("[")
    end = reply.rfind("]")
    if start == -1 or end < start:
        raise TopicParseError("reply contains no bracketed list")
    snippet = reply[start : end + 1]

    labels: list[str] | None = None
    try:
        value = ast.literal_eval(snippet)
        if isinstance(value, (list, tuple)) and all(isinstance(v, str) for v in value):
            labels = list(value)
    except (ValueError, SyntaxError):
        pass
    if labels is None:
        inner = snippet[1:-1]
        quoted = _QUOTED.findall(inner)
        if quoted:
            labels = [a or b for a, b in quoted]
        else:
            labels = inner.split(",")

    out: list[str] = []
    seen: set[str] = set()
    for label in labels:
        cleaned = label.strip().strip("'\"").strip()
        if not cleaned:
            continue
        key = cleaned.casefold()
        if key in seen:
            continue
        seen.add(key)
        out.append(cleaned)
    if not out:
        raise TopicParseError("reply parsed to an empty topic list")
    return out


def _sanitize_labels(labels: Iterable[str]) -> tuple[str, ...]:
    out: list[str] = []
    seen: set[str] = set()
    for label in labels:
        if label.casefold() in RESERVED_LABELS:
            label = RESERVED_COLLISION_LABEL
        key = label.casefold()
        if key not in seen:
            seen.add(key)
            out.append(label)
    return tuple(out)


def generate_topics(
    corpus: Corpus,
    demos: DemonstrationSet,
    backend: BackendConfig | LlmGateway,
) -> list[TopicAssignment]:
    """Prompt once per document and route every outcome.

    Refusals become Inappropriate, transport failures and unparseable
    replies become Miscellaneous, everything else carries its parsed
    labels. The result has exactly one assignment per document, in corpus
    order.
    """
    gateway = as_gateway(backend)
    assignments: list[TopicAssignment] = []
    for doc in corpus.documents:
        exchange = build_generation_prompt(doc, demos)
        outcome = gateway.complete(exchange)
        if outcome.status == "refused":
            assignments.append(TopicAssignment(doc.id, (), "inappropriate"))
            continue
        if outcome.status != "ok":
            assignments.append(TopicAssignment(doc.id, (), "miscellaneous"))
            continue
        try:
            labels = parse_topic_list(outcome.text)
        except TopicParseError:
            assignments.append(TopicAssignment(doc.id, (), "miscellaneous"))
            continue
        assignments.append(TopicAssignment(doc.id, _sanitize_labels(labels), "generated"))
    return assignments


def provenance_counts(assignments: Iterable[TopicAssignment]) -> dict[str, int]:
    counts = Counter(a.provenance for a in assignments)
    return {key: counts.get(key, 0) for key in ("generated", "miscellaneous", "inappropriate")}


def save_assignments(assignments: Iterable[TopicAssignment], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for a in assignments:
            record = {"doc_id": a.doc_id, "topics": list(a.topics), "provenance": a.provenance}
            f.write(json.dumps(record, sort_keys=True, ensure_ascii=True) + "\n")


def load_assignments(path: str | Path) -> list[TopicAssignment]:
    out = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            record = json.loads(line)
            out.append(
                TopicAssignment(
                    doc_id=record["doc_id"],
                    topics=tuple(record["topics"]),
                    provenance=record["provenance"],
                )
            )
    return out
