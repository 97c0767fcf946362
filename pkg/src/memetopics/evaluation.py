"""Topic quality metrics: NPMI coherence and representation diversity.

Coherence scores each topic by the mean normalized pointwise mutual
information over all unordered pairs of its representation words, with
probabilities estimated from document-level boolean co-occurrence in the
reference corpus (the preprocessed memes themselves):

    npmi(x, y) = ln((P(x,y) + e) / (P(x) * P(y) + e)) / -ln(P(x,y) + e)

clamped to [-1, 1], with smoothing constant e keeping the logarithms
finite. Diversity is the fraction of distinct words across all topic
representations. Reserved failure clusters are excluded from both metrics
by default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .corpus import Corpus, cooccurrence_counts
from .generation import RESERVED_LABELS
from .representation import TopicRepresentation

DEFAULT_EPSILON = 1e-6

# Declared in every report: how probabilities are estimated and where the
# smoothing constant enters the formula.
COOCCURRENCE_ESTIMATOR = "boolean-document"
EPSILON_PLACEMENT = "ratio-terms-and-normalizer"


@dataclass
class CoherenceReport:
    """Per-topic and aggregate coherence plus diversity for one topic set."""

    per_topic_npmi: dict[str, float]
    mean_npmi: float
    diversity: float
    epsilon: float
    k: int
    words_per_topic: int
    excluded: list[str] = field(default_factory=list)
    estimator: str = COOCCURRENCE_ESTIMATOR
    epsilon_placement: str = EPSILON_PLACEMENT

    def to_dict(self) -> dict:
        return {
            "mean_npmi": self.mean_npmi,
            "diversity": self.diversity,
            "epsilon": self.epsilon,
            "k": self.k,
            "words_per_topic": self.words_per_topic,
            "per_topic": dict(sorted(self.per_topic_npmi.items())),
            "excluded": sorted(self.excluded),
            "estimator": self.estimator,
            "epsilon_placement": self.epsilon_placement,
        }


def _npmi_from_counts(c1: int, c2: int, c12: int, total: int, epsilon: float) -> float:
    p1 = c1 / total
    p2 = c2 / total
    p12 = c12 / total
    numerator = math.log((p12 + epsilon) / (p1 * p2 + epsilon))
    denominator = -math.log(p12 + epsilon)
    if denominator == 0.0:
        return 0.0
    value = numerator / denominator
    return max(-1.0, min(1.0, value)) + 0.0


def npmi_pair(w1: str, w2: str, corpus: Corpus, epsilon: float = DEFAULT_EPSILON) -> float:
    """NPMI of one word pair against the corpus, in [-1, 1].

    Absent words simply contribute zero counts; the smoothing constant
    keeps the result finite.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    if corpus.total_docs == 0:
        raise ValueError("corpus is empty")
    counts = cooccurrence_counts(corpus, [w1, w2])
    return _npmi_from_counts(
        counts.count(w1), counts.count(w2), counts.pair(w1, w2), corpus.total_docs, epsilon
    )


def _is_reserved(topic: str) -> bool:
    return topic.casefold() in RESERVED_LABELS


def coherence(
    reps: Sequence[TopicRepresentation],
    corpus: Corpus,
    epsilon: float = DEFAULT_EPSILON,
    include_reserved: bool = False,
) -> CoherenceReport:
    """Score a set of topic representations against the corpus.

    Per-topic value: mean NPMI over all unordered word pairs (45 pairs for
    a ten-word representation). Representations with fewer than two words
    cannot form a pair; they are skipped and listed in the report.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    usable: list[TopicRepresentation] = []
    excluded: list[str] = []
    for rep in reps:
        if not include_reserved and _is_reserved(rep.topic):
            continue
        if len(rep.words) < 2:
            excluded.append(rep.topic)
        else:
            usable.append(rep)
    if not usable:
        raise ValueError("no representation has the two words needed for coherence")

    vocabulary = {word for rep in usable for word in rep.words}
    counts = cooccurrence_counts(corpus, vocabulary)
    total = corpus.total_docs

    per_topic: dict[str, float] = {}
    for rep in usable:
        words = rep.words
        values = []
        for i, w1 in enumerate(words):
            for w2 in words[i + 1 :]:
                values.append(
                    _npmi_from_counts(
                        counts.count(w1), counts.count(w2), counts.pair(w1, w2), total, epsilon
                    )
                )
        per_topic[rep.topic] = sum(values) / len(values)

    included = [rep for rep in reps if not (_is_reserved(rep.topic) and not include_reserved)]
    return CoherenceReport(
        per_topic_npmi=per_topic,
        mean_npmi=sum(per_topic.values()) / len(per_topic),
        diversity=diversity(included),
        epsilon=epsilon,
        k=len(per_topic),
        words_per_topic=max(len(rep.words) for rep in usable),
        excluded=excluded,
    )


def diversity(reps: Sequence[TopicRepresentation]) -> float:
    """Distinct words across all representations over total words listed."""
    if not reps:
        raise ValueError("diversity needs at least one representation")
    total = sum(len(rep.words) for rep in reps)
    if total == 0:
        raise ValueError("diversity needs at least one representation word")
    distinct = {word for rep in reps for word in rep.words}
    return len(distinct) / total
