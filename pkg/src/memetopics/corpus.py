"""Meme corpus ingestion, text preprocessing, and corpus statistics.

A meme arrives flattened to text: an image caption from a captioning model
plus the text superimposed on the image. This module loads those records
from JSONL or CSV, cleans them into token lists, and exposes the counts
(vocabulary, document frequencies, co-occurrences) that the weighting and
evaluation stages consume.
"""

from __future__ import annotations

import csv
import json
import unicodedata
from collections import Counter
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

URL_PREFIXES = ("http://", "https://", "www.")
USERNAME_PREFIX = "@"


class CorpusFormatError(ValueError):
    """Raised when an input record cannot be parsed into a MemeDocument."""


@dataclass(frozen=True)
class MemeDocument:
    """One meme flattened to text, with tokens filled in by preprocess()."""

    id: str
    caption: str
    overlay_text: str
    tokens: tuple[str, ...] = ()

    @property
    def raw_text(self) -> str:
        """Caption followed by superimposed text, the order tokens derive from."""
        return f"{self.caption} {self.overlay_text}"


@dataclass(frozen=True)
class PreprocessConfig:
    """Cleaning rules: stopwords, a manual blocklist, and token length floor.

    The blocklist holds words removed after reviewing the most frequent
    terms of a corpus; keeping it in config makes that manual step
    reproducible.
    """

    stopwords: frozenset[str] = frozenset()
    extra_blocklist: frozenset[str] = frozenset()
    min_token_len: int = 1
    lowercase: bool = True

    def __post_init__(self) -> None:
        if self.min_token_len < 1:
            raise ValueError("min_token_len must be >= 1")


@dataclass
class Corpus:
    """A collection of meme documents plus derived statistics.

    vocabulary/doc_freq/total_docs are empty until preprocess() runs; they
    are recomputed from scratch on every preprocess call.
    """

    documents: list[MemeDocument]
    vocabulary: dict[str, int] = field(default_factory=dict)
    doc_freq: dict[str, int] = field(default_factory=dict)
    total_docs: int = 0

    def __post_init__(self) -> None:
        self._index = {doc.id: doc for doc in self.documents}
        if len(self._index) != len(self.documents):
            raise CorpusFormatError("duplicate document ids in corpus")
        if not self.total_docs:
            self.total_docs = len(self.documents)

    def document(self, doc_id: str) -> MemeDocument:
        try:
            return self._index[doc_id]
        except KeyError:
            raise KeyError(f"unknown document id {doc_id!r}") from None

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._index


def default_stopwords() -> frozenset[str]:
    """The bundled English stopword list (one word per line, UTF-8)."""
    text = resources.files("memetopics.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


def load_stopwords(path: str | Path) -> frozenset[str]:
    """Read a stopword list file: one word per line, UTF-8, blanks ignored."""
    with open(path, encoding="utf-8") as f:
        return frozenset(line.strip() for line in f if line.strip())


def _require_str(record: Mapping, key: str, where: str) -> str:
    if key not in record:
        raise CorpusFormatError(f"{where}: missing field {key!r}")
    value = record[key]
    if not isinstance(value, str):
        raise CorpusFormatError(f"{where}: field {key!r} must be a string")
    return value


def load_corpus(path: str | Path, format: str = "jsonl") -> Corpus:
    """Load meme records into an unprocessed Corpus.

    Records carry {"id", "caption", "text"} where "text" is the superimposed
    text. Duplicate ids and malformed records raise CorpusFormatError naming
    the offending line.
    """
    path = Path(path)
    if format == "jsonl":
        records = _read_jsonl(path)
    elif format == "csv":
        records = _read_csv(path)
    else:
        raise ValueError(f"unsupported corpus format {format!r}")

    documents: list[MemeDocument] = []
    seen: dict[str, int] = {}
    for lineno, record in records:
        where = f"{path.name}:{lineno}"
        raw_id = record.get("id")
        if isinstance(raw_id, int):
            raw_id = str(raw_id)
        if not isinstance(raw_id, str) or not raw_id:
            raise CorpusFormatError(f"{where}: missing or invalid 'id'")
        if raw_id in seen:
            raise CorpusFormatError(
                f"{where}: duplicate document id {raw_id!r} (first seen at line {seen[raw_id]})"
            )
        seen[raw_id] = lineno
        caption = _require_str(record, "caption", where)
        overlay = _require_str(record, "text", where)
        documents.append(MemeDocument(id=raw_id, caption=caption, overlay_text=overlay))
    return Corpus(documents=documents)


def _read_jsonl(path: Path) -> list[tuple[int, dict]]:
    rows = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path.name}:{lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise CorpusFormatError(f"{path.name}:{lineno}: record must be a JSON object")
            rows.append((lineno, record))
    return rows


def _read_csv(path: Path) -> list[tuple[int, dict]]:
    rows = []
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or not {"id", "caption", "text"} <= set(reader.fieldnames):
            raise CorpusFormatError(f"{path.name}:1: CSV header must include id, caption, text")
        for record in reader:
            rows.append((reader.line_num, dict(record)))
    return rows


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(text: str, cfg: PreprocessConfig) -> list[str]:
    """Split on whitespace, drop URLs/usernames, strip edge punctuation, filter.

    Every surviving token is a substring-derived unit of the input after
    case folding; the function never invents tokens.
    """
    tokens = []
    for raw in text.split():
        word = raw.lower() if cfg.lowercase else raw
        if word.startswith(URL_PREFIXES) or word.startswith(USERNAME_PREFIX):
            continue
        start, end = 0, len(word)
        while start < end and _is_punct(word[start]):
            start += 1
        while end > start and _is_punct(word[end - 1]):
            end -= 1
        word = word[start:end]
        if len(word) < cfg.min_token_len:
            continue
        if word in cfg.stopwords or word in cfg.extra_blocklist:
            continue
        tokens.append(word)
    return tokens


def preprocess(corpus: Corpus, cfg: PreprocessConfig) -> Corpus:
    """Populate tokens for every document and recompute corpus statistics.

    Documents whose tokens come out empty are retained: they can still be
    assigned topics from their raw text. Idempotent, and deterministic for
    a fixed input corpus and config.
    """
    documents = [
        replace(doc, tokens=tuple(tokenize(doc.raw_text, cfg))) for doc in corpus.documents
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


def top_frequent_words(corpus: Corpus, k: int) -> list[tuple[str, int]]:
    """Top k words by document frequency, ties broken lexicographically.

    Supports the manual review of the most frequent terms that feeds the
    extra_blocklist. k larger than the vocabulary returns the full ranking.
    """
    ranked = sorted(corpus.doc_freq.items(), key=lambda item: (-item[1], item[0]))
    return ranked[: max(k, 0)]


@dataclass
class Cooccurrence:
    """Document-level unigram and pairwise co-occurrence counts."""

    doc_count: dict[str, int]
    pair_doc_count: dict[tuple[str, str], int]
    total_docs: int

    def count(self, word: str) -> int:
        return self.doc_count.get(word, 0)

    def pair(self, w1: str, w2: str) -> int:
        if w1 == w2:
            return self.count(w1)
        key = (w1, w2) if w1 <= w2 else (w2, w1)
        return self.pair_doc_count.get(key, 0)


def cooccurrence_counts(corpus: Corpus, words: Iterable[str]) -> Cooccurrence:
    """Count, for each word and word pair, how many documents contain them.

    Membership is per-document boolean (a word counts once per document no
    matter how often it repeats). Words absent from the corpus get count 0.
    """
    wanted = sorted(set(words))
    postings: dict[str, set[int]] = {w: set() for w in wanted}
    for idx, doc in enumerate(corpus.documents):
        token_set = set(doc.tokens)
        for w in wanted:
            if w in token_set:
                postings[w].add(idx)
    doc_count = {w: len(ids) for w, ids in postings.items()}
    pair_doc_count: dict[tuple[str, str], int] = {}
    for i, w1 in enumerate(wanted):
        for w2 in wanted[i + 1 :]:
            pair_doc_count[(w1, w2)] = len(postings[w1] & postings[w2])
    return Cooccurrence(
        doc_count=doc_count, pair_doc_count=pair_doc_count, total_docs=corpus.total_docs
    )


def save_processed(corpus: Corpus, path: str | Path) -> None:
    """Write a processed corpus as JSONL with stable key order and encoding."""
    with open(path, "w", encoding="utf-8") as f:
        for doc in corpus.documents:
            record = {
                "id": doc.id,
                "caption": doc.caption,
                "text": doc.overlay_text,
                "tokens": list(doc.tokens),
            }
            f.write(json.dumps(record, sort_keys=True, ensure_ascii=True) + "\n")


def load_processed(path: str | Path) -> Corpus:
    """Read a corpus written by save_processed, recomputing statistics."""
    documents = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            record = json.loads(line)
            documents.append(
                MemeDocument(
                    id=record["id"],
                    caption=record["caption"],
                    overlay_text=record["text"],
                    tokens=tuple(record["tokens"]),
                )
            )
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
