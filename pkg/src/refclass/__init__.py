"""Fractional subject classification of papers from reference generations.

Papers are classified into the target categories of an ASJC-style
taxonomy using the journals of their references (first generation),
their references' references (second generation), or a weighted blend,
under fractional or full counting, and evaluated against journal-based
baselines or a gold standard.
"""

from .classifier import (
    Classification,
    ClassificationConfig,
    CorpusClassifier,
    PaperAssignment,
    UnclassifiablePaperError,
    asjc_baseline,
    classify_corpus,
    classify_paper,
    default_grid,
    paper_shares,
    select_categories,
)
from .corpus import (
    Corpus,
    CorpusError,
    JournalRecord,
    PaperRecord,
    active_reference_counts,
    active_reference_distribution,
    emit_corpus,
    first_generation,
    ingest,
    second_generation,
)
from .scheme import (
    Area,
    Category,
    CategoryScheme,
    SchemeError,
    fractionalize_journal,
    load_scheme,
    write_scheme,
)
from .synthgen import SynthParams, SynthResult, emit_synth, generate

__version__ = "0.1.0"

__all__ = [
    "Area",
    "Category",
    "CategoryScheme",
    "Classification",
    "ClassificationConfig",
    "Corpus",
    "CorpusClassifier",
    "CorpusError",
    "JournalRecord",
    "PaperAssignment",
    "PaperRecord",
    "SchemeError",
    "SynthParams",
    "SynthResult",
    "UnclassifiablePaperError",
    "active_reference_counts",
    "active_reference_distribution",
    "asjc_baseline",
    "classify_corpus",
    "classify_paper",
    "default_grid",
    "emit_corpus",
    "emit_synth",
    "first_generation",
    "fractionalize_journal",
    "generate",
    "ingest",
    "load_scheme",
    "paper_shares",
    "second_generation",
    "select_categories",
    "write_scheme",
]
