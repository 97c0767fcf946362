"""Collapse the fixture's ten generated topics to five, both ways.

Replays the recorded responses for the prompt-matched route, then runs the
word-similarity route on the same assignments, and prints both merge logs
side by side.

Usage: python demos/03_collapse_two_ways.py
"""

from pathlib import Path

from memetopics import (
    BackendConfig,
    CollapseState,
    PreprocessConfig,
    collapse_pbm,
    collapse_wsm,
    default_stopwords,
    generate_topics,
    load_corpus,
    preprocess,
)
from memetopics.generation import DemonstrationSet

FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"

corpus = preprocess(
    load_corpus(FIXTURES / "memes50.jsonl"),
    PreprocessConfig(stopwords=default_stopwords()),
)
replay = BackendConfig(
    kind="replay", model_name="mock-model", cache_path=str(FIXTURES / "replay_cache.jsonl")
)
assignments = generate_topics(corpus, DemonstrationSet.default(), replay)

state = CollapseState.from_assignments(assignments, k_target=5)
print(f"generated topics ({state.non_reserved_count()}):")
for label, count in sorted(state.freq.items(), key=lambda kv: -kv[1]):
    print(f"  {label:<15} {count} memes")

print()
print("=" * 60)
print("Prompt-matched collapse (asks the model where each topic goes)")
print("=" * 60)
pbm = collapse_pbm(state, replay)
for source, target, method in pbm.merge_log:
    print(f"  {source:<15} -> {target}")
print("final:", {label: len(ids) for label, ids in sorted(pbm.topics.items())})
print("miscellaneous docs:", sorted(pbm.misc))

print()
print("=" * 60)
print("Word-similarity collapse (merges the highest-overlap pair)")
print("=" * 60)
wsm = collapse_wsm(state, corpus)
for source, target, method in wsm.merge_log:
    marker = "  (zero-similarity fallback)" if method == "wsm-zero" else ""
    print(f"  {source:<15} -> {target}{marker}")
print("final:", {label: len(ids) for label, ids in sorted(wsm.topics.items())})
print("miscellaneous docs:", sorted(wsm.misc), "(this route never adds any)")
