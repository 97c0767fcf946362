"""Shared helpers: corpus builders and scripted backends."""

from __future__ import annotations

import json
from collections import Counter
from pathlib import Path

import pytest

from memetopics.corpus import Corpus, MemeDocument
from memetopics.llm import BackendConfig

FIXTURES_DIR = Path(__file__).parent / "fixtures"


def corpus_from_tokens(pairs: list[tuple[str, list[str]]]) -> Corpus:
    """Build an already-processed corpus straight from (id, tokens) pairs."""
    documents = [
        MemeDocument(id=doc_id, caption=" ".join(tokens), overlay_text="", tokens=tuple(tokens))
        for doc_id, tokens in pairs
    ]
    doc_freq: Counter[str] = Counter()
    for doc in documents:
        doc_freq.update(set(doc.tokens))
    vocabulary = {word: idx for idx, word in enumerate(sorted(doc_freq))}
    return Corpus(
        documents=documents,
        vocabulary=vocabulary,
        doc_freq=dict(doc_freq),
        total_docs=len(documents),
    )


def mock_backend(rules=(), default="[]", **kwargs) -> BackendConfig:
    return BackendConfig(
        kind="mock",
        model_name="mock-model",
        mock_rules=tuple((needle, reply) for needle, reply in rules),
        mock_default=default,
        **kwargs,
    )


def write_jsonl(path: Path, records: list[dict]) -> Path:
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record) + "\n")
    return path


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES_DIR
