"""Class-based TF-IDF over topic clusters.

Each topic's member documents are concatenated into one class document;
a word's weight in a class is its within-class frequency scaled by an
inverse class-frequency factor:

    weight(x, c) = tf(x, c) * ln(1 + (1 + C) / (1 + df(x)))

where tf(x, c) counts occurrences of word x in class c's concatenated
tokens, df(x) is the number of classes containing x, and C is the number
of classes. The word similarity collapse and both topic representation
strategies read from this table.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .corpus import Corpus
from .generation import RESERVED_LABELS, TopicAssignment


@dataclass
class CtfidfTable:
    """Per-class term frequencies, class document frequencies, and weights."""

    classes: list[str]
    class_tf: dict[str, dict[str, int]]
    df: dict[str, int]
    num_classes: int
    weights: dict[str, dict[str, float]]

    def write_tsv(self, path: str | Path) -> None:
        """Dump (class, word, tf, df, weight) rows for inspection."""
        with open(path, "w", encoding="utf-8") as f:
            f.write("class\tword\ttf\tdf\tweight\n")
            for cls in self.classes:
                for word in sorted(self.class_tf[cls]):
                    f.write(
                        f"{cls}\t{word}\t{self.class_tf[cls][word]}\t"
                        f"{self.df[word]}\t{self.weights[cls][word]:.10g}\n"
                    )


@dataclass
class TopicWordSet:
    """Up to `cap` words of one topic, ranked by weight then alphabetically."""

    topic: str
    words: list[str]
    cap: int


def ctfidf_from_clusters(clusters: Mapping[str, Iterable[str]], corpus: Corpus) -> CtfidfTable:
    """Build the weight table from explicit topic -> member-doc-id clusters.

    A document appearing in several clusters contributes its full token
    list to each of them.
    """
    if not clusters:
        raise ValueError("c-TF-IDF needs at least one class")
    classes = sorted(clusters)
    class_tf: dict[str, dict[str, int]] = {}
    for cls in classes:
        counts: Counter[str] = Counter()
        for doc_id in clusters[cls]:
            counts.update(corpus.document(doc_id).tokens)
        class_tf[cls] = dict(counts)

    df: Counter[str] = Counter()
    for cls in classes:
        df.update(class_tf[cls].keys())

    num_classes = len(classes)
    idf = {word: math.log(1.0 + (1.0 + num_classes) / (1.0 + n)) for word, n in df.items()}
    weights = {
        cls: {word: tf * idf[word] for word, tf in class_tf[cls].items()} for cls in classes
    }
    return CtfidfTable(
        classes=classes,
        class_tf=class_tf,
        df=dict(df),
        num_classes=num_classes,
        weights=weights,
    )


def build_ctfidf(
    assignments: Iterable[TopicAssignment],
    corpus: Corpus,
    include_reserved: bool = False,
) -> CtfidfTable:
    """Group generated assignments into clusters and weight them.

    The Miscellaneous/Inappropriate failure buckets are not topics and stay
    out of the class set unless include_reserved is passed.
    """
    clusters: dict[str, set[str]] = {}
    for assignment in assignments:
        if assignment.provenance != "generated":
            continue
        for label in assignment.topics:
            if not include_reserved and label.casefold() in RESERVED_LABELS:
                continue
            clusters.setdefault(label, set()).add(assignment.doc_id)
    return ctfidf_from_clusters(clusters, corpus)


def top_words(table: CtfidfTable, topic: str, k: int) -> TopicWordSet:
    """The k heaviest words of a class; ties go to the alphabetically
    smaller word, and classes with fewer than k distinct words return all
    of them."""
    if topic not in table.weights:
        raise KeyError(f"unknown topic {topic!r}")
    ranked = sorted(table.weights[topic].items(), key=lambda item: (-item[1], item[0]))
    return TopicWordSet(topic=topic, words=[word for word, _ in ranked[:k]], cap=k)
