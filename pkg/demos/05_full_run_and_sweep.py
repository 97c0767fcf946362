"""Run the whole pipeline from one config, then sweep K.

Everything replays from the recorded response cache, so this works offline
and produces the same bytes every time. Artifacts land in ./demo_runs/.

Usage: python demos/05_full_run_and_sweep.py
"""

import json
from pathlib import Path

from memetopics import BackendConfig, RunConfig, run_pipeline, sweep

FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"
OUT = Path("demo_runs")

backend = BackendConfig(
    kind="replay",
    model_name="mock-model",
    cache_path=str(FIXTURES / "replay_cache.jsonl"),
)

print("=" * 60)
print("1. Full prompt-matched run (collapse and representation prompted)")
print("=" * 60)
cfg = RunConfig(
    corpus_path=str(FIXTURES / "memes50.jsonl"),
    backend=backend,
    collapse_method="pbm",
    representation_method="llm",
    k=5,
    output_dir=str(OUT / "pbm"),
)
outdir = run_pipeline(cfg)
manifest = json.loads((outdir / "manifest.json").read_text())
print(f"variant:        {manifest['variant']}")
print(f"stages:         {manifest['stages_completed']}")
print(f"routing:        {manifest['failure_counts']}")
print(f"merge summary:  {manifest['collapse_summary']}")
print(f"metrics:        {manifest['metrics']}")
print(f"config digest:  {manifest['config_digest'][:16]}...")
print(f"artifacts in:   {outdir}")

print()
print("=" * 60)
print("2. K sweep on the word-similarity variant")
print("=" * 60)
sweep_cfg = RunConfig(
    corpus_path=str(FIXTURES / "memes50.jsonl"),
    backend=backend,
    collapse_method="wsm",
    representation_method="ctfidf",
    output_dir=str(OUT / "sweep"),
)
rows = sweep(sweep_cfg, [2, 3, 5, 8])
print(f"{'K':>3}  {'mean NPMI':>10}  {'diversity':>9}")
for row in rows:
    print(f"{row['k']:>3}  {row['mean_npmi']:>10.4f}  {row['diversity']:>9.2f}")
print(f"CSV written to {OUT / 'sweep' / 'sweep.csv'}")
