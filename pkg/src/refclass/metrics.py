"""Evaluation metrics for corpus classifications.

All metrics operate on :class:`~refclass.classifier.Classification`
objects plus, where needed, the corpus and scheme.  Category sizes are
fractional (a paper spreads weight 1 over its assigned categories), so
sizes sum to the number of classified papers.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .classifier import Classification
from .corpus import Corpus
from .scheme import CategoryScheme

REF_CV_SCOPES = ("resolved_only", "all_refs")
REF_CV_WINDOWS = ("all", "prev2", "prev3")


def category_sizes(classification: Classification) -> dict[int, float]:
    """Fractional paper count per category, sorted by code.

    Sizes sum to the number of classified papers (each assignment's
    weights sum to 1).
    """
    sizes: dict[int, float] = {}
    for assignment in classification.assignments.values():
        for code, weight in assignment.entries:
            sizes[code] = sizes.get(code, 0.0) + weight
    return dict(sorted(sizes.items()))


@dataclass(frozen=True)
class SizeStats:
    n_categories: int
    total_weight: float
    max_size: float
    min_size: float
    cv: float
    granularity: float


def size_stats(classification: Classification) -> SizeStats:
    """Dispersion summary of the category size distribution.

    CV uses the population convention (sigma/mu over categories with
    nonzero size).  Granularity is total weight divided by the sum of
    squared sizes; smaller sizes spread over more categories give larger
    values.
    """
    sizes = np.array(list(category_sizes(classification).values()))
    if len(sizes) == 0:
        raise ValueError("empty classification")
    mean = sizes.mean()
    var = np.mean(sizes**2) - mean**2
    cv = math.sqrt(max(var, 0.0)) / mean
    total = float(sizes.sum())
    return SizeStats(
        n_categories=len(sizes),
        total_weight=total,
        max_size=float(sizes.max()),
        min_size=float(sizes.min()),
        cv=float(cv),
        granularity=total / float((sizes**2).sum()),
    )


@dataclass(frozen=True)
class ReferenceCV:
    """Average within-category variability of per-paper reference counts."""

    value: float
    categories_used: int
    categories_skipped: int  # nonzero membership but zero mean reference count


def _reference_count_array(corpus: Corpus, scope: str, window: str) -> np.ndarray:
    """Per-row reference counts under a scope and year window.

    Windows count references whose cited paper's year falls in
    [year-k, year-1].  Unresolved references have no year, so they are
    included only under scope="all_refs" with window="all".
    """
    if scope not in REF_CV_SCOPES:
        raise ValueError(f"unknown scope {scope!r}")
    if window not in REF_CV_WINDOWS:
        raise ValueError(f"unknown window {window!r}")
    n = corpus.n_papers
    mat = corpus.ref_matrix()
    src = np.repeat(np.arange(n, dtype=np.int64), np.diff(mat.indptr))
    dst = mat.indices
    mult = mat.data
    if window == "all":
        mask = np.ones(len(src), dtype=bool)
    else:
        k = int(window[4:])
        ysrc = corpus.year_array[src]
        ydst = corpus.year_array[dst]
        mask = (ydst >= ysrc - k) & (ydst <= ysrc - 1)
    counts = np.bincount(src[mask], weights=mult[mask], minlength=n).astype(
        np.float64
    )
    if scope == "all_refs" and window == "all":
        for pid, extra in corpus.unresolved_ref_counts.items():
            counts[corpus.row_of(pid)] += extra
    return counts


def reference_cv(
    classification: Classification,
    corpus: Corpus,
    scope: str = "resolved_only",
    window: str = "all",
) -> ReferenceCV:
    """Mean over categories of the weighted CV of reference counts.

    Within each category, member papers are weighted by their assignment
    weight; the per-category CV (population convention) is then averaged
    unweighted over categories.  Categories whose weighted mean count is
    zero cannot have a CV and are skipped with a count.
    """
    counts = _reference_count_array(corpus, scope, window)
    rows: list[int] = []
    codes: list[int] = []
    weights: list[float] = []
    for pid, assignment in classification.assignments.items():
        row = corpus.row_of(pid)
        for code, weight in assignment.entries:
            rows.append(row)
            codes.append(code)
            weights.append(weight)
    if not rows:
        raise ValueError("empty classification")
    code_arr = np.array(codes, dtype=np.int64)
    uniq, inv = np.unique(code_arr, return_inverse=True)
    w = np.array(weights)
    x = counts[np.array(rows, dtype=np.int64)]
    wsum = np.bincount(inv, weights=w, minlength=len(uniq))
    m1 = np.bincount(inv, weights=w * x, minlength=len(uniq))
    m2 = np.bincount(inv, weights=w * x * x, minlength=len(uniq))
    mu = m1 / wsum
    var = np.maximum(m2 / wsum - mu**2, 0.0)
    usable = mu > 0
    cvs = np.sqrt(var[usable]) / mu[usable]
    if not usable.any():
        raise ValueError("no category has a nonzero mean reference count")
    return ReferenceCV(
        value=float(cvs.mean()),
        categories_used=int(usable.sum()),
        categories_skipped=int(len(uniq) - usable.sum()),
    )


# -- agreement with a second classification ------------------------------


def _common_papers(test: Classification, gold: Classification) -> list[int]:
    common = [pid for pid in test.assignments if pid in gold.assignments]
    if not common:
        raise ValueError("empty paper intersection")
    return common


def coincidence(test: Classification, gold: Classification) -> float:
    """Mean percentage of shared assignment weight over common papers.

    Per paper the overlap is the sum of min(test weight, gold weight)
    over categories; identical assignments score 100.
    """
    common = _common_papers(test, gold)
    total = 0.0
    for pid in common:
        a = test.assignments[pid].as_dict()
        b = gold.assignments[pid].as_dict()
        if len(b) < len(a):
            a, b = b, a
        total += sum(min(w, b[c]) for c, w in a.items() if c in b)
    return 100.0 * total / len(common)


@dataclass(frozen=True)
class WinnerRanks:
    """Cross-ranking of top categories between two classifications.

    A winner is any category sharing a paper's maximum weight; its rank
    is its 1-based position within the other classification's first five
    entries, deeper or absent hits count as missing.
    """

    avg_rank_gold_in_test: float | None
    missing_gold_in_test_pct: float
    avg_rank_test_in_gold: float | None
    missing_test_in_gold_pct: float


@dataclass(frozen=True)
class ComparisonReport:
    coincidence_pct: float
    avg_rank_gold_in_test: float | None
    missing_gold_in_test_pct: float
    avg_rank_test_in_gold: float | None
    missing_test_in_gold_pct: float
    n_common: int


def _rank_side(
    winners_of: Classification, ranked_in: Classification, common: Sequence[int]
) -> tuple[float | None, float]:
    rank_sum = 0
    found = 0
    missing = 0
    for pid in common:
        positions = {
            code: i + 1 for i, (code, _w) in
            enumerate(ranked_in.assignments[pid].entries[:5])
        }
        for code in winners_of.assignments[pid].winners:
            rank = positions.get(code)
            if rank is None:
                missing += 1
            else:
                rank_sum += rank
                found += 1
    total = found + missing
    avg = rank_sum / found if found else None
    return avg, 100.0 * missing / total if total else 0.0


def winner_rank_stats(test: Classification, gold: Classification) -> WinnerRanks:
    """Average cross-rank of winners in both directions."""
    common = _common_papers(test, gold)
    avg_gold, miss_gold = _rank_side(gold, test, common)
    avg_test, miss_test = _rank_side(test, gold, common)
    return WinnerRanks(
        avg_rank_gold_in_test=avg_gold,
        missing_gold_in_test_pct=miss_gold,
        avg_rank_test_in_gold=avg_test,
        missing_test_in_gold_pct=miss_test,
    )


def compare_classifications(
    test: Classification, gold: Classification
) -> ComparisonReport:
    """Coincidence plus winner cross-ranks against a reference."""
    common = _common_papers(test, gold)
    ranks = winner_rank_stats(test, gold)
    return ComparisonReport(
        coincidence_pct=coincidence(test, gold),
        avg_rank_gold_in_test=ranks.avg_rank_gold_in_test,
        missing_gold_in_test_pct=ranks.missing_gold_in_test_pct,
        avg_rank_test_in_gold=ranks.avg_rank_test_in_gold,
        missing_test_in_gold_pct=ranks.missing_test_in_gold_pct,
        n_common=len(common),
    )


# -- assignment shape ------------------------------------------------------


@dataclass(frozen=True)
class AssignmentProfile:
    n_papers: int
    avg_categories: float
    pct_by_count: tuple[float, float, float, float, float]  # 1, 2, 3, 4, 5+


def assignment_profile(classification: Classification) -> AssignmentProfile:
    """How many categories papers end up with."""
    if not classification.assignments:
        raise ValueError("empty classification")
    buckets = [0, 0, 0, 0, 0]
    total_cats = 0
    for assignment in classification.assignments.values():
        k = len(assignment.entries)
        total_cats += k
        buckets[min(k, 5) - 1] += 1
    n = len(classification.assignments)
    return AssignmentProfile(
        n_papers=n,
        avg_categories=total_cats / n,
        pct_by_count=tuple(100.0 * b / n for b in buckets),  # type: ignore[arg-type]
    )


def area_distribution(
    classification: Classification, scheme: CategoryScheme
) -> dict[int, float]:
    """Percentage of assignment weight per area, sorted by area code."""
    weights: dict[int, float] = {}
    total = 0.0
    for assignment in classification.assignments.values():
        for code, weight in assignment.entries:
            area = scheme.area_of(code)
            weights[area] = weights.get(area, 0.0) + weight
            total += weight
    if total <= 0.0:
        raise ValueError("empty classification")
    return {area: 100.0 * w / total for area, w in sorted(weights.items())}


def restrict_classification(
    classification: Classification, paper_ids: Iterable[int]
) -> Classification:
    """View of a classification limited to a paper subset."""
    keep = set(paper_ids)
    return Classification(
        label=classification.label,
        assignments={
            pid: a for pid, a in classification.assignments.items() if pid in keep
        },
        config=classification.config,
        baseline_threshold=classification.baseline_threshold,
    )


def multidisciplinary_paper_ids(corpus: Corpus, scheme: CategoryScheme) -> set[int]:
    """Citable papers whose journal's codes all sit in the catch-all area."""
    multi_journals = {
        jid
        for jid, rec in corpus.journals.items()
        if rec.assigned_codes
        and all(
            scheme.area_of(code) == scheme.multidisciplinary_area
            for code in rec.assigned_codes
        )
    }
    out: set[int] = set()
    citable = corpus.citable_mask
    jids = corpus.journal_id_array
    pids = corpus.paper_id_array
    for row in np.flatnonzero(citable).tolist():
        if int(jids[row]) in multi_journals:
            out.add(int(pids[row]))
    return out


def size_correlation(
    classifications: Sequence[Classification],
    scheme: CategoryScheme,
    paper_ids: Iterable[int] | None = None,
) -> np.ndarray:
    """Pearson correlation matrix of category size vectors.

    Vectors span every target category of the scheme, zeros included,
    optionally restricted to a paper subset.  Order follows the input
    sequence.
    """
    if not classifications:
        raise ValueError("no classifications given")
    keep = set(paper_ids) if paper_ids is not None else None
    vectors = np.zeros((len(classifications), len(scheme.targets)))
    for i, classification in enumerate(classifications):
        for pid, assignment in classification.assignments.items():
            if keep is not None and pid not in keep:
                continue
            for code, weight in assignment.entries:
                vectors[i, scheme.target_index[code]] += weight
    return np.corrcoef(vectors)


@dataclass(frozen=True)
class MiscRetention:
    area_code: int
    n_papers: int
    retention_pct: float  # mean share of paper weight kept inside the area


def misc_retention(
    classification: Classification, corpus: Corpus, scheme: CategoryScheme
) -> dict[int, MiscRetention]:
    """Area-weight retention of papers from single-misc-code journals.

    Considers journals assigned exactly one code, that code being an
    area's miscellaneous category; measures the mean percentage of those
    papers' classified weight that stays within the area.
    """
    journal_area: dict[int, int] = {}
    for jid, rec in corpus.journals.items():
        if len(rec.assigned_codes) != 1:
            continue
        (code,) = rec.assigned_codes
        cat = scheme.category_by_code[code]
        if cat.is_misc and cat.area_code != scheme.multidisciplinary_area:
            journal_area[jid] = cat.area_code
    per_area: dict[int, list[float]] = {}
    for pid, assignment in classification.assignments.items():
        area = journal_area.get(corpus.paper(pid).journal_id)
        if area is None:
            continue
        kept = sum(
            w for code, w in assignment.entries if scheme.area_of(code) == area
        )
        total = sum(w for _c, w in assignment.entries)
        per_area.setdefault(area, []).append(100.0 * kept / total)
    return {
        area: MiscRetention(
            area_code=area,
            n_papers=len(vals),
            retention_pct=float(np.mean(vals)),
        )
        for area, vals in sorted(per_area.items())
    }


def categories_per_year(
    classification: Classification, corpus: Corpus
) -> dict[int, float]:
    """Average number of assigned categories per paper, by paper year."""
    totals: dict[int, int] = {}
    counts: dict[int, int] = {}
    for pid, assignment in classification.assignments.items():
        year = int(corpus.year_array[corpus.row_of(pid)])
        totals[year] = totals.get(year, 0) + len(assignment.entries)
        counts[year] = counts.get(year, 0) + 1
    return {year: totals[year] / counts[year] for year in sorted(totals)}


WEIGHT_BANDS = tuple(f"{i / 10:.1f}" for i in range(1, 11)) + ("1.0+",)


def weight_band_profile(classification: Classification) -> list[tuple[str, int]]:
    """Category counts per size-share band.

    A category's share is its size as a percentage of total weight; band
    "0.2" covers [0.1%, 0.2%), the last band everything at or above 1%.
    Only categories with nonzero size are counted.
    """
    sizes = category_sizes(classification)
    total = sum(sizes.values())
    if total <= 0:
        raise ValueError("empty classification")
    counts = [0] * 11
    for size in sizes.values():
        pct = 100.0 * size / total
        counts[min(int(pct * 10), 10)] += 1
    return list(zip(WEIGHT_BANDS, counts))


# -- citation normalization ------------------------------------------------


@dataclass(frozen=True)
class NormalizedImpact:
    """Citation impact normalized by category-year expected citations.

    ``per_paper`` maps paper id to sum over its categories of weight
    times (citations / category-year weighted mean citations).  By
    construction the plain mean over papers of one year is 1.  A zero
    category mean with nonzero paper citations cannot arise from a
    consistent corpus; it is flagged as infinite and excluded from
    ``overall_mean`` with a count.
    """

    per_paper: dict[int, float]
    flagged_infinite: int
    overall_mean: float


def normalized_impact(
    corpus: Corpus, classification: Classification
) -> NormalizedImpact:
    pids = list(classification.assignments)
    pid_index = {pid: i for i, pid in enumerate(pids)}
    rows = []
    codes = []
    weights = []
    owner = []
    for pid, assignment in classification.assignments.items():
        row = corpus.row_of(pid)
        for code, weight in assignment.entries:
            rows.append(row)
            codes.append(code)
            weights.append(weight)
            owner.append(pid_index[pid])
    if not rows:
        raise ValueError("empty classification")
    rows_arr = np.array(rows, dtype=np.int64)
    w = np.array(weights)
    owner_arr = np.array(owner, dtype=np.int64)
    cit = corpus.citation_array[rows_arr].astype(np.float64)
    years = corpus.year_array[rows_arr]
    key = np.array(codes, dtype=np.int64) * 100000 + (years - years.min())
    uniq, inv = np.unique(key, return_inverse=True)
    den = np.bincount(inv, weights=w, minlength=len(uniq))
    num = np.bincount(inv, weights=w * cit, minlength=len(uniq))
    mu = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    mu_term = mu[inv]
    bad = (mu_term == 0.0) & (cit > 0.0)
    terms = np.divide(
        w * cit, mu_term, out=np.zeros_like(w), where=mu_term > 0.0
    )
    ni = np.bincount(owner_arr, weights=terms, minlength=len(pids))
    flagged = set(owner_arr[bad].tolist())
    per_paper: dict[int, float] = {}
    finite_sum = 0.0
    finite_n = 0
    for i, pid in enumerate(pids):
        if i in flagged:
            per_paper[pid] = math.inf
        else:
            per_paper[pid] = float(ni[i])
            finite_sum += float(ni[i])
            finite_n += 1
    return NormalizedImpact(
        per_paper=per_paper,
        flagged_infinite=len(flagged),
        overall_mean=finite_sum / finite_n if finite_n else math.nan,
    )


# -- low-reference diagnostics ----------------------------------------------


@dataclass(frozen=True)
class GateCell:
    """Weight failing one gate, its share of the row, and its mean impact."""

    weight: float
    pct: float
    mean_ni: float | None


@dataclass(frozen=True)
class LowReferenceRow:
    area_code: int
    area_name: str
    total_weight: float
    gen1: GateCell
    gen2: GateCell
    both: GateCell


@dataclass(frozen=True)
class LowReferenceReport:
    rows: tuple[LowReferenceRow, ...]
    summary: LowReferenceRow
    flagged_infinite: int
    min_active_refs: int


def low_reference_report(
    corpus: Corpus,
    scheme: CategoryScheme,
    baseline: Classification,
    min_active_refs: int = 3,
) -> LowReferenceReport:
    """Where the papers failing the reference gates sit, by area.

    Weight attribution uses the raw journal codes at 1/k, mapped to
    their areas before any redistribution (catch-all-area codes land on
    the catch-all row).  Mean normalized impact comes from the given
    journal-based classification; papers absent from it contribute
    weight but no impact term.  Covers citable papers of journals with
    at least one code.
    """
    ni = normalized_impact(corpus, baseline)
    n1, n2 = corpus.active_count_arrays()
    n12 = n1 + n2
    journal_areas: dict[int, list[tuple[int, float]]] = {}
    for jid, rec in corpus.journals.items():
        if not rec.assigned_codes:
            continue
        share = 1.0 / len(rec.assigned_codes)
        acc: dict[int, float] = {}
        for code in sorted(rec.assigned_codes):
            area = scheme.area_of(code)
            acc[area] = acc.get(area, 0.0) + share
        journal_areas[jid] = sorted(acc.items())

    gates = ("gen1", "gen2", "both")
    total: dict[int, float] = {}
    fail_w = {g: {} for g in gates}  # type: dict[str, dict[int, float]]
    ni_num = {g: {} for g in gates}
    ni_den = {g: {} for g in gates}
    flagged = 0
    pid_arr = corpus.paper_id_array
    jid_arr = corpus.journal_id_array
    citable = corpus.citable_mask
    counts = {"gen1": n1, "gen2": n2, "both": n12}
    for row in np.flatnonzero(citable).tolist():
        areas = journal_areas.get(int(jid_arr[row]))
        if areas is None:
            continue
        pid = int(pid_arr[row])
        value = ni.per_paper.get(pid)
        infinite = value is not None and math.isinf(value)
        if infinite:
            flagged += 1
        for area, w in areas:
            total[area] = total.get(area, 0.0) + w
        for gate in gates:
            if counts[gate][row] < min_active_refs:
                for area, w in areas:
                    fail_w[gate][area] = fail_w[gate].get(area, 0.0) + w
                    if value is not None and not infinite:
                        ni_num[gate][area] = ni_num[gate].get(area, 0.0) + w * value
                        ni_den[gate][area] = ni_den[gate].get(area, 0.0) + w

    def cell(gate: str, area: int, denom: float) -> GateCell:
        weight = fail_w[gate].get(area, 0.0)
        den = ni_den[gate].get(area, 0.0)
        return GateCell(
            weight=weight,
            pct=100.0 * weight / denom if denom > 0 else 0.0,
            mean_ni=ni_num[gate][area] / den if den > 0 else None,
        )

    rows = tuple(
        LowReferenceRow(
            area_code=area,
            area_name=scheme.area_by_code[area].name,
            total_weight=tw,
            gen1=cell("gen1", area, tw),
            gen2=cell("gen2", area, tw),
            both=cell("both", area, tw),
        )
        for area, tw in sorted(total.items())
    )

    def summary_cell(gate: str) -> GateCell:
        weight = sum(fail_w[gate].values())
        den = sum(ni_den[gate].values())
        num = sum(ni_num[gate].values())
        grand = sum(total.values())
        return GateCell(
            weight=weight,
            pct=100.0 * weight / grand if grand > 0 else 0.0,
            mean_ni=num / den if den > 0 else None,
        )

    summary = LowReferenceRow(
        area_code=-1,
        area_name="all areas",
        total_weight=sum(total.values()),
        gen1=summary_cell("gen1"),
        gen2=summary_cell("gen2"),
        both=summary_cell("both"),
    )
    return LowReferenceReport(
        rows=rows,
        summary=summary,
        flagged_infinite=flagged,
        min_active_refs=min_active_refs,
    )
