from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from refclass.synthgen import SynthParams, SynthResult, generate


@pytest.fixture(scope="session")
def noisy_small() -> SynthResult:
    """Mixed corpus: misc/multi/codeless journals, low-ref papers."""
    return generate(
        SynthParams(
            seed=7,
            n_areas=3,
            cats_per_area=3,
            n_journals=80,
            n_papers=400,
            refs_per_paper=(3, 7),
            within_category_prob=0.7,
            misc_journal_frac=0.12,
            multi_journal_frac=0.06,
            unclassified_journal_frac=0.06,
            low_ref_frac=0.15,
            non_citable_frac=0.05,
            years=(2015, 2019),
        )
    )


@pytest.fixture(scope="session")
def clean_small() -> SynthResult:
    """Zero-noise corpus: single-code journals only, pure within-category
    referencing; every classification should recover the plant."""
    return generate(
        SynthParams(
            seed=11,
            n_areas=3,
            cats_per_area=3,
            n_journals=40,
            n_papers=300,
            refs_per_paper=(4, 8),
            within_category_prob=1.0,
            misc_journal_frac=0.0,
            multi_journal_frac=0.0,
            unclassified_journal_frac=0.0,
            low_ref_frac=0.0,
            years=(2016, 2019),
        )
    )
