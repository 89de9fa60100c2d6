"""Classify one paper step by step on a small synthetic corpus.

Shows the raw pieces behind a classification: per-generation share
vectors, the golden-ratio blend, and threshold-chain selection.

    python3 demos/quickstart.py
"""

from __future__ import annotations

from refclass.classifier import (
    ClassificationConfig,
    classify_paper,
    paper_shares,
    usable_reference_counts,
)
from refclass.synthgen import SynthParams, generate

result = generate(
    SynthParams(
        seed=42,
        n_areas=2,
        cats_per_area=3,
        n_journals=30,
        n_papers=200,
        refs_per_paper=(4, 8),
        within_category_prob=0.8,
        misc_journal_frac=0.1,
        multi_journal_frac=0.05,
        unclassified_journal_frac=0.05,
        low_ref_frac=0.1,
        years=(2016, 2019),
    )
)
corpus, scheme = result.corpus, result.scheme
print(corpus)
print(f"targets: {scheme.targets}")

# pick a late-year paper so both reference generations are populated
pid = next(
    pid
    for pid in reversed(corpus.paper_id_array.tolist())
    if usable_reference_counts(corpus, scheme, pid, "WC")[1] >= 3
)
planted = result.truth[pid]
print(f"\npaper {pid} (planted category {planted})")

for scheme_id in ("M1", "M2", "M3"):
    config = ClassificationConfig(scheme_id, "WC")
    shares = paper_shares(corpus, scheme, pid, config)
    pretty = {c: round(w, 4) for c, w in sorted(shares.items(), key=lambda kv: -kv[1])}
    print(f"  {scheme_id} WC shares: {pretty}")

config = ClassificationConfig("M3", "WC", threshold=0.8)
assignment = classify_paper(corpus, scheme, pid, config)
print(f"\n{config.label} assignment ({assignment.source}):")
for code, weight in assignment.entries:
    marker = " <- planted" if code == planted else ""
    print(f"  {code}: {weight:.4f}{marker}")
