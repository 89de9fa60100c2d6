"""Run the full 30-configuration grid plus baselines on one corpus.

Prints size statistics per configuration and agreement with the
planted gold standard, the same numbers the CLI writes as CSV tables.

    python3 demos/grid_experiment.py
"""

from __future__ import annotations

import time

from refclass.classifier import CorpusClassifier, default_grid
from refclass.metrics import coincidence, size_stats, winner_rank_stats
from refclass.synthgen import SynthParams, generate

result = generate(
    SynthParams(
        seed=9,
        n_areas=3,
        cats_per_area=4,
        n_journals=120,
        n_papers=20_000,
        refs_per_paper=(6, 12),
        within_category_prob=0.7,
        misc_journal_frac=0.1,
        multi_journal_frac=0.05,
        unclassified_journal_frac=0.05,
        low_ref_frac=0.1,
        years=(2014, 2019),
    )
)
corpus, scheme, gold = result.corpus, result.scheme, result.gold
print(corpus)

engine = CorpusClassifier(corpus, scheme)
grid = default_grid()
started = time.perf_counter()
engine.prepare(grid)

rows = []
for config in grid:
    classification = engine.classify(config, threads=0)
    stats = size_stats(classification)
    rows.append(
        (
            config.label,
            stats.cv,
            stats.granularity,
            coincidence(classification, gold),
            winner_rank_stats(classification, gold).avg_rank_gold_in_test,
            classification.gate_failures,
        )
    )
baseline = engine.baseline()
rows.append(
    (
        baseline.label,
        size_stats(baseline).cv,
        size_stats(baseline).granularity,
        coincidence(baseline, gold),
        winner_rank_stats(baseline, gold).avg_rank_gold_in_test,
        baseline.gate_failures,
    )
)
elapsed = time.perf_counter() - started

print(f"\n{'label':<12} {'cv':>8} {'granularity':>12} {'coincid.':>9} "
      f"{'rank':>6} {'fallbacks':>9}")
for label, cv, gran, coin, rank, failures in rows:
    print(f"{label:<12} {cv:8.4f} {gran:12.3e} {coin:9.2f} {rank:6.2f} {failures:9d}")
print(f"\n{len(rows)} classifications in {elapsed:.1f}s")
