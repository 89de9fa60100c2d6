"""Synthetic corpus generator with a planted gold classification.

Every paper gets a planted target category; its journal, references and
citations are drawn around that plant so recovery is measurable.  The
generator consumes only the uniform stream of numpy's default PCG64
generator (``random``/``integers``) and derives all variates by
arithmetic on those draws, so output is bit-reproducible across
platforms and numpy versions.  References always point to papers of
strictly earlier years; first-year papers therefore have none and
exercise the journal fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .classifier import REFERENCE_BASED, Classification, PaperAssignment
from .corpus import Corpus, JournalRecord, PaperRecord, emit_corpus
from .scheme import Area, Category, CategoryScheme, write_scheme

MULTI_AREA_CODE = 1000


class SynthesisError(ValueError):
    """Infeasible generator parameters."""


@dataclass(frozen=True)
class SynthParams:
    """Generator knobs; defaults give a small mixed corpus.

    Journal-type fractions drive both the journal table composition and
    the per-paper journal draw, so they are also the expected share of
    papers per journal type.  ``low_ref_frac`` papers get 0-2 references
    instead of the configured range.
    """

    seed: int = 0
    n_areas: int = 4
    cats_per_area: int = 4
    n_journals: int = 120
    n_papers: int = 1000
    refs_per_paper: tuple[int, int] = (4, 8)
    within_category_prob: float = 0.8
    misc_journal_frac: float = 0.10
    multi_journal_frac: float = 0.05
    unclassified_journal_frac: float = 0.05
    low_ref_frac: float = 0.05
    non_citable_frac: float = 0.0
    years: tuple[int, int] = (2016, 2020)
    citation_scale: float = 3.0

    def __post_init__(self) -> None:
        if self.n_areas < 1:
            raise SynthesisError("infeasible params: need at least one area")
        if not 1 <= self.cats_per_area <= 99:
            raise SynthesisError("infeasible params: cats_per_area must be 1..99")
        if self.n_papers < 1 or self.n_journals < 1:
            raise SynthesisError("infeasible params: need papers and journals")
        lo, hi = self.refs_per_paper
        if lo < 0 or hi < lo:
            raise SynthesisError("infeasible params: bad refs_per_paper range")
        for name in (
            "within_category_prob",
            "misc_journal_frac",
            "multi_journal_frac",
            "unclassified_journal_frac",
            "low_ref_frac",
            "non_citable_frac",
        ):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise SynthesisError(f"infeasible params: {name} outside [0, 1]")
        if (
            self.misc_journal_frac
            + self.multi_journal_frac
            + self.unclassified_journal_frac
            > 1.0
        ):
            raise SynthesisError("infeasible params: journal fractions exceed 1")
        if self.years[1] < self.years[0]:
            raise SynthesisError("infeasible params: empty year range")
        if self.citation_scale < 0:
            raise SynthesisError("infeasible params: negative citation scale")


@dataclass(frozen=True)
class SynthResult:
    params: SynthParams
    scheme: CategoryScheme
    corpus: Corpus
    truth: dict[int, int]
    gold: Classification


def make_scheme(params: SynthParams) -> CategoryScheme:
    """Taxonomy with one catch-all area and regular areas of equal size."""
    categories = [
        Category(MULTI_AREA_CODE, "Multidisciplinary", MULTI_AREA_CODE, True)
    ]
    areas = [Area(MULTI_AREA_CODE, "Multidisciplinary", True)]
    for a in range(1, params.n_areas + 1):
        area_code = MULTI_AREA_CODE + 100 * a
        areas.append(Area(area_code, f"Area {a}", False))
        categories.append(
            Category(area_code, f"Area {a} (miscellaneous)", area_code, True)
        )
        for i in range(1, params.cats_per_area + 1):
            categories.append(
                Category(area_code + i, f"Area {a} Category {i}", area_code, False)
            )
    return CategoryScheme(categories, areas)


def _journal_table(
    params: SynthParams, scheme: CategoryScheme
) -> tuple[list[JournalRecord], dict[int, list[int]], dict[int, list[int]], list[int], list[int]]:
    n_misc = int(round(params.n_journals * params.misc_journal_frac))
    n_multi = int(round(params.n_journals * params.multi_journal_frac))
    n_uncl = int(round(params.n_journals * params.unclassified_journal_frac))
    n_regular = params.n_journals - n_misc - n_multi - n_uncl
    targets = scheme.targets
    if n_regular < len(targets):
        raise SynthesisError(
            f"infeasible params: {n_regular} regular journals cannot cover "
            f"{len(targets)} target categories"
        )
    if params.misc_journal_frac > 0 and n_misc < scheme.n_areas - 1:
        raise SynthesisError(
            "infeasible params: fewer miscellaneous journals than areas"
        )
    if params.multi_journal_frac > 0 and n_multi < 1:
        raise SynthesisError(
            "infeasible params: multi_journal_frac rounds to zero journals"
        )
    if params.unclassified_journal_frac > 0 and n_uncl < 1:
        raise SynthesisError(
            "infeasible params: unclassified_journal_frac rounds to zero journals"
        )
    journals: list[JournalRecord] = []
    regular_by_target: dict[int, list[int]] = {t: [] for t in targets}
    misc_by_area: dict[int, list[int]] = {}
    multi_ids: list[int] = []
    uncl_ids: list[int] = []
    jid = 0
    for i in range(n_regular):
        jid += 1
        home = targets[i % len(targets)]
        journals.append(JournalRecord(jid, frozenset({home})))
        regular_by_target[home].append(jid)
    regular_areas = [a.area_code for a in scheme.areas if not a.is_multidisciplinary]
    for i in range(n_misc):
        jid += 1
        area = regular_areas[i % len(regular_areas)]
        journals.append(JournalRecord(jid, frozenset({area})))
        misc_by_area.setdefault(area, []).append(jid)
    for _ in range(n_multi):
        jid += 1
        journals.append(JournalRecord(jid, frozenset({MULTI_AREA_CODE})))
        multi_ids.append(jid)
    for _ in range(n_uncl):
        jid += 1
        journals.append(JournalRecord(jid, frozenset()))
        uncl_ids.append(jid)
    return journals, regular_by_target, misc_by_area, multi_ids, uncl_ids


def generate(params: SynthParams) -> SynthResult:
    """Build scheme, corpus and gold standard for the given parameters.

    The planted category of a paper is the gold assignment; journals of
    non-regular types blur the observable signal without changing it.
    """
    scheme = make_scheme(params)
    journals, regular_by_target, misc_by_area, multi_ids, uncl_ids = _journal_table(
        params, scheme
    )
    rng = np.random.default_rng(params.seed)
    n = params.n_papers
    targets = np.asarray(scheme.targets, dtype=np.int64)

    planted_idx = rng.integers(0, len(targets), size=n) if n else np.empty(0, np.int64)
    planted = targets[planted_idx]
    type_u = rng.random(n)

    misc_cut = params.misc_journal_frac
    multi_cut = misc_cut + params.multi_journal_frac
    uncl_cut = multi_cut + params.unclassified_journal_frac
    paper_jids = np.empty(n, dtype=np.int64)
    for i in range(n):
        cat = int(planted[i])
        u = type_u[i]
        if u < misc_cut:
            area = scheme.area_of(cat)
            pool = misc_by_area[area]
        elif u < multi_cut:
            pool = multi_ids
        elif u < uncl_cut:
            pool = uncl_ids
        else:
            pool = regular_by_target[cat]
        paper_jids[i] = pool[int(rng.integers(0, len(pool)))]

    # Skewed citation counts from a product of uniforms; pure float
    # multiplication keeps the draw bit-identical across platforms.
    cit_u1 = rng.random(n)
    cit_u2 = rng.random(n)
    citations = np.floor(4.0 * params.citation_scale * cit_u1 * cit_u2).astype(
        np.int64
    )
    if params.non_citable_frac > 0:
        citable = rng.random(n) >= params.non_citable_frac
    else:
        citable = np.ones(n, dtype=bool)

    y0, y1 = params.years
    span = y1 - y0 + 1
    years = np.array([y0 + (i * span) // n for i in range(n)], dtype=np.int64) if n else np.empty(0, np.int64)
    # First row of each paper's own year: rows before it are strictly older.
    starts = np.searchsorted(years, years, side="left")
    rows_by_cat = {
        int(c): np.flatnonzero(planted == c) for c in targets.tolist()
    }

    pids = np.arange(1, n + 1, dtype=np.int64)
    lo, hi = params.refs_per_paper
    edges: list[tuple[int, int]] = []
    for i in range(n):
        if rng.random() < params.low_ref_frac:
            k = int(rng.integers(0, 3))
        else:
            k = int(rng.integers(lo, hi + 1))
        prefix = int(starts[i])
        if k == 0 or prefix == 0:
            continue
        cat = int(planted[i])
        pool = rows_by_cat[cat]
        e_same = int(np.searchsorted(pool, prefix))
        e_other = prefix - e_same
        flags = rng.random(k) < params.within_category_prob
        n_within = int(flags.sum())
        if n_within and e_same:
            within_rows = pool[rng.integers(0, e_same, size=n_within)]
        else:
            within_rows = np.empty(0, dtype=np.int64)
        wi = 0
        src = int(pids[i])
        for flag in flags.tolist():
            if flag:
                if e_same:
                    edges.append((src, int(pids[within_rows[wi]])))
                    wi += 1
            elif e_other:
                while True:
                    r = int(rng.integers(0, prefix))
                    if planted[r] != cat:
                        break
                edges.append((src, int(pids[r])))

    papers = [
        PaperRecord(
            paper_id=int(pids[i]),
            year=int(years[i]),
            journal_id=int(paper_jids[i]),
            citations=int(citations[i]),
            is_citable=bool(citable[i]),
        )
        for i in range(n)
    ]
    corpus = Corpus.build(papers, journals, edges, source_name="<synthetic>")
    truth = {int(pids[i]): int(planted[i]) for i in range(n)}
    gold = Classification(
        label="gold",
        assignments={
            pid: PaperAssignment(((cat, 1.0),), REFERENCE_BASED)
            for pid, cat in truth.items()
        },
    )
    return SynthResult(
        params=params, scheme=scheme, corpus=corpus, truth=truth, gold=gold
    )


def emit_synth(result: SynthResult, out_dir: str) -> None:
    """Write scheme.csv, the corpus CSVs and truth.csv to a directory."""
    from .reports import write_truth

    os.makedirs(out_dir, exist_ok=True)
    write_scheme(result.scheme, os.path.join(out_dir, "scheme.csv"))
    emit_corpus(result.corpus, out_dir)
    write_truth(result.truth, os.path.join(out_dir, "truth.csv"))
