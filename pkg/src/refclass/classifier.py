"""Parametric reference-based fractional classification.

A paper's share vector is built from the fractional category vectors of
its references' journals (first generation), of its references'
references (second generation, with the focal paper excluded from
citation cycles), or a fixed-weight blend of both.  Shares are then cut
to at most five categories by a relative-drop chain rule and
renormalized.  Papers with too few usable references keep their
journal's own fractional vector untruncated.

Two equivalent evaluation routes exist: a per-paper one built from
explicit reference walks (:func:`paper_shares`, :func:`classify_paper`)
and a corpus-level one built from sparse matrix products
(:class:`CorpusClassifier`).  They agree to float accumulation error;
tests pin the difference below 1e-12.
"""

from __future__ import annotations

import os
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .corpus import Corpus, JournalRecord, first_generation, second_generation
from .scheme import CategoryScheme, CategoryVector, fractionalize_journal

SCHEME_IDS = ("M1", "M2", "M3")
COUNTING_METHODS = ("FC", "WC")
DEFAULT_THRESHOLDS = (0.5, 2.0 / 3.0, 0.8)
DEFAULT_BASELINE_THRESHOLDS: tuple[float | None, ...] = (None, 0.5, 2.0 / 3.0, 0.8)
DEFAULT_GEN1_WEIGHT = 0.618
DEFAULT_GEN2_WEIGHT = 0.382

REFERENCE_BASED = "reference_based"
JOURNAL_FALLBACK = "journal_fallback"

# Slack for the chain comparison: share >= t*prev must hold for exact
# rational boundaries (e.g. 0.32 vs 0.8*0.4) that float products miss.
CHAIN_EPS = 1e-12

# Raw second-generation shares after cycle-exclusion subtraction may keep
# cancellation residue around 1e-16; legitimate raw entries are orders of
# magnitude larger, so anything below this is noise.
_TINY = 1e-12


class UnclassifiablePaperError(ValueError):
    """Paper fails the reference gate and its journal has no codes."""


def threshold_label(threshold: float) -> str:
    if abs(threshold - 2.0 / 3.0) < 1e-9:
        return "0.67"
    return f"{threshold:g}"


@dataclass(frozen=True)
class ClassificationConfig:
    """One point of the parametric configuration space.

    ``scheme_id`` picks the reference generations used (M1 first, M2
    second, M3 blend), ``counting`` how a journal's codes become weights
    (FC: one full count per directly assigned target code; WC: the
    fractional vector), ``averaged`` whether each first-generation
    paper's children are divided by their active count so every parent
    contributes unit weight to the second generation.
    """

    scheme_id: str
    counting: str
    averaged: bool = False
    threshold: float = 2.0 / 3.0
    gen1_weight: float = DEFAULT_GEN1_WEIGHT
    gen2_weight: float = DEFAULT_GEN2_WEIGHT
    max_categories: int = 5
    min_active_refs: int = 3

    def __post_init__(self) -> None:
        if self.scheme_id not in SCHEME_IDS:
            raise ValueError(f"unknown scheme_id {self.scheme_id!r}")
        if self.counting not in COUNTING_METHODS:
            raise ValueError(f"unknown counting method {self.counting!r}")
        if self.averaged and self.scheme_id == "M1":
            raise ValueError("averaging applies to second-generation schemes only")
        if not 0.0 < self.threshold <= 1.0:
            raise ValueError("threshold must be in (0, 1]")
        if self.gen1_weight < 0.0 or self.gen2_weight < 0.0:
            raise ValueError("generation weights must be non-negative")
        if abs(self.gen1_weight + self.gen2_weight - 1.0) > 1e-9:
            raise ValueError("generation weights must sum to 1")
        if self.max_categories < 1:
            raise ValueError("max_categories must be at least 1")
        if self.min_active_refs < 0:
            raise ValueError("min_active_refs must be non-negative")

    @property
    def counting_label(self) -> str:
        return ("A" if self.averaged else "") + self.counting

    @property
    def label(self) -> str:
        return f"{self.scheme_id}-{self.counting_label}-{threshold_label(self.threshold)}"


@dataclass(frozen=True)
class PaperAssignment:
    """Final fractional assignment of one paper.

    ``entries`` are (category code, weight) pairs sorted by weight
    descending then code ascending; weights are positive and sum to 1.
    ``source`` records whether the entries came from references or from
    the journal's own category vector.
    """

    entries: tuple[tuple[int, float], ...]
    source: str

    def as_dict(self) -> CategoryVector:
        return dict(self.entries)

    @property
    def winners(self) -> tuple[int, ...]:
        """All codes sharing the maximum weight."""
        top = self.entries[0][1]
        return tuple(c for c, w in self.entries if w == top)


@dataclass
class Classification:
    """A full corpus classification under one configuration.

    ``assignments`` maps paper id to assignment for every citable paper
    that could be classified; ``gate_failures`` counts papers that fell
    back to their journal vector (or would have), ``unclassifiable``
    counts gate failures whose journal carries no codes (absent from
    ``assignments``).
    """

    label: str
    assignments: dict[int, PaperAssignment]
    config: ClassificationConfig | None = None
    baseline_threshold: float | None = None
    gate_failures: int = 0
    unclassifiable: int = 0

    @property
    def n_papers(self) -> int:
        return len(self.assignments)


# -- per-paper route ------------------------------------------------------


def reference_contribution(
    journal: JournalRecord, counting: str, scheme: CategoryScheme
) -> CategoryVector:
    """Category weights a single reference contributes via its journal.

    WC: the journal's fractional vector (sums to 1).  FC: weight 1 per
    directly assigned target code; misc and catch-all-area codes carry
    nothing, so a journal with only such codes yields an empty vector
    (the reference is inactive under FC).
    """
    if not journal.assigned_codes:
        raise ValueError(f"journal {journal.journal_id} has no category codes")
    if counting == "WC":
        return fractionalize_journal(journal.assigned_codes, scheme)
    if counting == "FC":
        return {
            code: 1.0
            for code in sorted(journal.assigned_codes)
            if scheme.is_target(code)
        }
    raise ValueError(f"unknown counting method {counting!r}")


def _normalized(vec: CategoryVector) -> CategoryVector:
    total = sum(vec.values())
    if total <= 0.0:
        raise ValueError("cannot normalize an empty share vector")
    return {c: w / total for c, w in sorted(vec.items())}


def generation_share(
    contributions: Sequence[Sequence[CategoryVector]], averaged: bool
) -> CategoryVector:
    """Normalized share vector of one reference generation.

    ``contributions`` holds one inner list per first-generation parent
    (a single all-containing group for the first generation itself).
    With ``averaged`` each parent's nonempty contributions are divided
    by their count, so every parent adds total weight 1.
    """
    total: CategoryVector = {}
    any_active = False
    for group in contributions:
        active = [c for c in group if c]
        if not active:
            continue
        any_active = True
        scale = 1.0 / len(active) if averaged else 1.0
        for contrib in active:
            for code, w in contrib.items():
                total[code] = total.get(code, 0.0) + w * scale
    if not any_active:
        raise ValueError("no active contributions in generation")
    return _normalized(total)


def combine_generations(
    s1: CategoryVector | None,
    s2: CategoryVector | None,
    gen1_weight: float = DEFAULT_GEN1_WEIGHT,
    gen2_weight: float = DEFAULT_GEN2_WEIGHT,
) -> CategoryVector:
    """Fixed-weight blend of two generation shares.

    A missing generation hands its full weight to the other.  No
    renormalization is applied when both are present: each input sums to
    1, so the blend does too (exact linearity is part of the contract).
    """
    if s1 is None and s2 is None:
        raise ValueError("at least one generation share is required")
    if s1 is None:
        return dict(s2)  # type: ignore[arg-type]
    if s2 is None:
        return dict(s1)
    codes = sorted(set(s1) | set(s2))
    return {c: gen1_weight * s1.get(c, 0.0) + gen2_weight * s2.get(c, 0.0) for c in codes}


def _contribution_groups(
    corpus: Corpus, scheme: CategoryScheme, paper_id: int, counting: str
) -> tuple[list[CategoryVector], list[list[CategoryVector]], int, int]:
    """Per-reference contribution vectors for both generations.

    Inactive references (journal yields an empty vector under the
    counting method) appear as empty dicts; returns the two usable
    counts alongside.
    """
    cache: dict[int, CategoryVector] = {}

    def contrib(pid: int) -> CategoryVector:
        jid = corpus.paper(pid).journal_id
        if jid not in cache:
            rec = corpus.journal(jid)
            if not rec.assigned_codes:
                cache[jid] = {}
            else:
                cache[jid] = reference_contribution(rec, counting, scheme)
        return cache[jid]

    gen1 = [contrib(rid) for rid in first_generation(corpus, paper_id)]
    n1 = sum(1 for c in gen1 if c)
    groups: list[list[CategoryVector]] = []
    n2 = 0
    for _parent, children in second_generation(corpus, paper_id):
        vecs = [contrib(gid) for gid in children]
        n2 += sum(1 for c in vecs if c)
        groups.append(vecs)
    return gen1, groups, n1, n2


def usable_reference_counts(
    corpus: Corpus, scheme: CategoryScheme, paper_id: int, counting: str
) -> tuple[int, int, int]:
    """(n1, n2, n1+n2) references usable under a counting method.

    Under WC any journal with codes contributes; under FC only journals
    with at least one directly assigned target code do.  These are the
    counts the classification gate compares against.
    """
    _gen1, _groups, n1, n2 = _contribution_groups(corpus, scheme, paper_id, counting)
    return n1, n2, n1 + n2


def paper_shares(
    corpus: Corpus,
    scheme: CategoryScheme,
    paper_id: int,
    config: ClassificationConfig,
) -> CategoryVector | None:
    """Pre-selection share vector of one paper, or None on gate failure.

    The gate counts references usable under the configured counting
    method in the generation(s) the scheme uses, so a passing paper
    always has a nonempty share vector.
    """
    gen1, groups, n1, n2 = _contribution_groups(
        corpus, scheme, paper_id, config.counting
    )
    if config.scheme_id == "M1":
        gate = n1
    elif config.scheme_id == "M2":
        gate = n2
    else:
        gate = n1 + n2
    # shares cannot be built from zero active references, so the gate
    # floor is 1 even when min_active_refs is 0
    if gate < max(config.min_active_refs, 1):
        return None
    if config.scheme_id == "M1":
        return generation_share([gen1], False)
    if config.scheme_id == "M2":
        return generation_share(groups, config.averaged)
    s1 = generation_share([gen1], False) if n1 > 0 else None
    s2 = generation_share(groups, config.averaged) if n2 > 0 else None
    return combine_generations(s1, s2, config.gen1_weight, config.gen2_weight)


def select_categories(
    shares: CategoryVector, threshold: float, max_categories: int = 5
) -> PaperAssignment:
    """Cut a share vector by the relative-drop chain rule and renormalize.

    Shares are ranked by weight descending (ties by code ascending); the
    top share is always kept and each further share is kept while it is
    at least ``threshold`` times the previously accepted one (within
    ``CHAIN_EPS``) and the cap is not reached.  Accepted shares are
    renormalized to sum 1.
    """
    if not shares:
        raise ValueError("cannot select from an empty share vector")
    ranked = sorted(shares.items(), key=lambda kv: (-kv[1], kv[0]))
    n = 1
    for i in range(1, min(len(ranked), max_categories)):
        if ranked[i][1] < threshold * ranked[i - 1][1] - CHAIN_EPS:
            break
        n += 1
    total = sum(w for _c, w in ranked[:n])
    entries = tuple((c, w / total) for c, w in ranked[:n])
    return PaperAssignment(entries=entries, source=REFERENCE_BASED)


def _journal_fallback(
    journal: JournalRecord, scheme: CategoryScheme
) -> PaperAssignment | None:
    if not journal.assigned_codes:
        return None
    vec = fractionalize_journal(journal.assigned_codes, scheme)
    entries = tuple(sorted(vec.items(), key=lambda kv: (-kv[1], kv[0])))
    return PaperAssignment(entries=entries, source=JOURNAL_FALLBACK)


def classify_paper(
    corpus: Corpus,
    scheme: CategoryScheme,
    paper_id: int,
    config: ClassificationConfig,
) -> PaperAssignment:
    """Classify one paper; journal fallback on gate failure.

    Fallback assignments keep the journal's full fractional vector,
    untruncated and unthresholded.  Raises
    :class:`UnclassifiablePaperError` when the gate fails and the
    journal has no codes.
    """
    shares = paper_shares(corpus, scheme, paper_id, config)
    if shares is not None:
        return select_categories(shares, config.threshold, config.max_categories)
    fallback = _journal_fallback(corpus.journal_of_paper(paper_id), scheme)
    if fallback is None:
        raise UnclassifiablePaperError(
            f"paper {paper_id}: gate failed and journal has no category codes"
        )
    return fallback


# -- corpus-level engine ---------------------------------------------------


def _csr_value(mat: sparse.csr_matrix, row: int, col: int) -> float:
    lo, hi = mat.indptr[row], mat.indptr[row + 1]
    idx = np.searchsorted(mat.indices[lo:hi], col)
    if idx < hi - lo and mat.indices[lo + idx] == col:
        return float(mat.data[lo + idx])
    return 0.0


def _row_arrays(mat: sparse.csr_matrix, row: int) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = mat.indptr[row], mat.indptr[row + 1]
    return mat.indices[lo:hi], mat.data[lo:hi]


class CorpusClassifier:
    """Corpus-wide classification engine over sparse matrix products.

    Builds the reference matrix and per-counting contribution matrices
    once, then evaluates any configuration cheaply; intermediate
    products are cached.  Call :meth:`prepare` before sharing an
    instance across threads so the caches are warm (afterwards
    :meth:`classify` only reads them).
    """

    def __init__(self, corpus: Corpus, scheme: CategoryScheme):
        self.corpus = corpus
        self.scheme = scheme
        self._targets = np.asarray(scheme.targets, dtype=np.int64)
        self._R = corpus.ref_matrix()
        self._k = corpus.mutual_citation_diag()
        self._fam: dict[str, dict[str, object]] = {}
        self._share_cache: dict[tuple, tuple[sparse.csr_matrix, np.ndarray]] = {}
        self._fallback_cache: dict[int, PaperAssignment | None] = {}
        self._journal_vec_cache: dict[int, tuple[np.ndarray, np.ndarray] | None] = {}

    # -- building blocks --------------------------------------------

    def _family(self, counting: str) -> dict[str, object]:
        """Contribution matrix and first/second generation products."""
        fam = self._fam.get(counting)
        if fam is not None:
            return fam
        corpus, scheme = self.corpus, self.scheme
        per_journal: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        empty = (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64))
        for jid, rec in corpus.journals.items():
            if not rec.assigned_codes:
                per_journal[jid] = empty
                continue
            vec = reference_contribution(rec, counting, scheme)
            if not vec:
                per_journal[jid] = empty
                continue
            cols = np.fromiter(
                (scheme.target_index[c] for c in vec), dtype=np.int64, count=len(vec)
            )
            vals = np.fromiter(vec.values(), dtype=np.float64, count=len(vec))
            per_journal[jid] = (cols, vals)
        n = corpus.n_papers
        jids = corpus.journal_id_array
        chunks_c = [per_journal[int(j)][0] for j in jids]
        chunks_v = [per_journal[int(j)][1] for j in jids]
        lengths = np.fromiter((len(c) for c in chunks_c), dtype=np.int64, count=n)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(lengths, out=indptr[1:])
        indices = np.concatenate(chunks_c) if n else np.empty(0, dtype=np.int64)
        data = np.concatenate(chunks_v) if n else np.empty(0, dtype=np.float64)
        P = sparse.csr_matrix(
            (data, indices, indptr), shape=(n, len(scheme.targets))
        )
        act = (np.diff(P.indptr) > 0).astype(np.float64)
        n1 = self._R @ act
        n2 = self._R @ n1 - self._k * act
        fam = {
            "P": P,
            "act": act,
            "n1": np.rint(n1).astype(np.int64),
            "n2": np.rint(n2).astype(np.int64),
            "G1": (self._R @ P).tocsr(),
        }
        self._fam[counting] = fam
        return fam

    @staticmethod
    def _clean(mat: sparse.csr_matrix) -> sparse.csr_matrix:
        mat = mat.tocsr()
        mat.data[np.abs(mat.data) < _TINY] = 0.0
        mat.eliminate_zeros()
        return mat

    def _second_raw(self, counting: str, averaged: bool) -> sparse.csr_matrix:
        fam = self._family(counting)
        key = "G2a" if averaged else "G2"
        if key in fam:
            return fam[key]  # type: ignore[return-value]
        R, k = self._R, self._k
        P: sparse.csr_matrix = fam["P"]  # type: ignore[assignment]
        G1: sparse.csr_matrix = fam["G1"]  # type: ignore[assignment]
        act: np.ndarray = fam["act"]  # type: ignore[assignment]
        n1 = fam["n1"].astype(np.float64)  # type: ignore[union-attr]
        if not averaged:
            out = R @ G1
            if k.any():
                out = out - sparse.diags(k) @ P
            out = self._clean(out)
        else:
            inv = np.divide(1.0, n1, out=np.zeros_like(n1), where=n1 > 0)
            g1_avg = (sparse.diags(inv) @ G1).tocsr()
            out = R @ g1_avg
            mutual = sparse.coo_matrix(R.multiply(R.T))
            if mutual.nnz:
                # Per-pair repair: the focal paper must be excluded from
                # its parent's children before averaging, which the bulk
                # product cannot do.
                rows: list[np.ndarray] = []
                cols: list[np.ndarray] = []
                vals: list[np.ndarray] = []
                for p, r in zip(mutual.row.tolist(), mutual.col.tolist()):
                    mult = _csr_value(R, p, r)
                    m = _csr_value(R, r, p)
                    c_cols, c_vals = _row_arrays(G1, r)
                    p_cols, p_vals = _row_arrays(P, p)
                    old = mult * inv[r]
                    denom = n1[r] - m * act[p]
                    new = mult / denom if denom > 0 else 0.0
                    if old:
                        rows.append(np.full(len(c_cols), p, dtype=np.int64))
                        cols.append(c_cols.astype(np.int64))
                        vals.append(-old * c_vals)
                    if new:
                        rows.append(np.full(len(c_cols), p, dtype=np.int64))
                        cols.append(c_cols.astype(np.int64))
                        vals.append(new * c_vals)
                        if len(p_cols):
                            rows.append(np.full(len(p_cols), p, dtype=np.int64))
                            cols.append(p_cols.astype(np.int64))
                            vals.append(-new * m * p_vals)
                corr = sparse.coo_matrix(
                    (
                        np.concatenate(vals),
                        (np.concatenate(rows), np.concatenate(cols)),
                    ),
                    shape=out.shape,
                )
                out = out + corr.tocsr()
            out = self._clean(out)
        fam[key] = out
        return out

    @staticmethod
    def _rownorm(mat: sparse.csr_matrix) -> sparse.csr_matrix:
        sums = np.asarray(mat.sum(axis=1)).ravel()
        inv = np.divide(1.0, sums, out=np.zeros_like(sums), where=sums > 0)
        return (sparse.diags(inv) @ mat).tocsr()

    def _shares_matrix(
        self, config: ClassificationConfig
    ) -> tuple[sparse.csr_matrix, np.ndarray]:
        """(row-normalized share matrix, gate count per row)."""
        key = (
            config.scheme_id,
            config.counting,
            config.averaged,
            config.gen1_weight,
            config.gen2_weight,
        )
        hit = self._share_cache.get(key)
        if hit is not None:
            return hit
        fam = self._family(config.counting)
        n1: np.ndarray = fam["n1"]  # type: ignore[assignment]
        n2: np.ndarray = fam["n2"]  # type: ignore[assignment]
        if config.scheme_id == "M1":
            shares = self._rownorm(fam["G1"])  # type: ignore[arg-type]
            gate = n1
        elif config.scheme_id == "M2":
            shares = self._rownorm(self._second_raw(config.counting, config.averaged))
            gate = n2
        else:
            s1 = self._rownorm(fam["G1"])  # type: ignore[arg-type]
            s2 = self._rownorm(self._second_raw(config.counting, config.averaged))
            both = (n1 > 0) & (n2 > 0)
            a = np.where(both, config.gen1_weight, np.where(n1 > 0, 1.0, 0.0))
            b = np.where(both, config.gen2_weight, np.where(n2 > 0, 1.0, 0.0))
            shares = (sparse.diags(a) @ s1 + sparse.diags(b) @ s2).tocsr()
            gate = n1 + n2
        result = (shares, gate)
        self._share_cache[key] = result
        return result

    def prepare(self, configs: Iterable[ClassificationConfig]) -> None:
        """Warm all caches needed by the given configs (thread safety)."""
        for config in configs:
            self._shares_matrix(config)

    # -- classification ------------------------------------------------

    def _fallback(self, jid: int) -> PaperAssignment | None:
        if jid not in self._fallback_cache:
            self._fallback_cache[jid] = _journal_fallback(
                self.corpus.journals[jid], self.scheme
            )
        return self._fallback_cache[jid]

    def _select_row(
        self,
        codes: np.ndarray,
        vals: np.ndarray,
        threshold: float,
        max_categories: int,
    ) -> tuple[tuple[int, float], ...]:
        order = np.lexsort((codes, -vals))
        codes = codes[order]
        vals = vals[order]
        n = 1
        for i in range(1, min(len(vals), max_categories)):
            if vals[i] < threshold * vals[i - 1] - CHAIN_EPS:
                break
            n += 1
        total = vals[:n].sum()
        return tuple((int(codes[i]), float(vals[i] / total)) for i in range(n))

    def _classify_rows(
        self,
        rows: np.ndarray,
        shares: sparse.csr_matrix,
        pass_mask: np.ndarray,
        config: ClassificationConfig,
    ) -> tuple[dict[int, PaperAssignment], int, int]:
        corpus = self.corpus
        pid_arr = corpus.paper_id_array
        jid_arr = corpus.journal_id_array
        indptr, indices, data = shares.indptr, shares.indices, shares.data
        targets = self._targets
        assignments: dict[int, PaperAssignment] = {}
        gate_failures = 0
        unclassifiable = 0
        for row in rows.tolist():
            pid = int(pid_arr[row])
            if pass_mask[row]:
                lo, hi = indptr[row], indptr[row + 1]
                entries = self._select_row(
                    targets[indices[lo:hi]],
                    data[lo:hi],
                    config.threshold,
                    config.max_categories,
                )
                assignments[pid] = PaperAssignment(entries, REFERENCE_BASED)
            else:
                gate_failures += 1
                fb = self._fallback(int(jid_arr[row]))
                if fb is None:
                    unclassifiable += 1
                else:
                    assignments[pid] = fb
        return assignments, gate_failures, unclassifiable

    def classify(
        self, config: ClassificationConfig, threads: int = 1
    ) -> Classification:
        """Classify every citable paper under one configuration.

        Output is independent of ``threads``: rows are processed in
        paper order and merged deterministically.
        """
        shares, gate = self._shares_matrix(config)
        pass_mask = gate >= max(config.min_active_refs, 1)
        rows = np.flatnonzero(self.corpus.citable_mask)
        if threads == 0:
            threads = os.cpu_count() or 1
        if threads <= 1 or len(rows) < 4096:
            assignments, gate_failures, unclassifiable = self._classify_rows(
                rows, shares, pass_mask, config
            )
        else:
            chunks = np.array_split(rows, threads * 4)
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(
                    pool.map(
                        lambda chunk: self._classify_rows(
                            chunk, shares, pass_mask, config
                        ),
                        chunks,
                    )
                )
            assignments = {}
            gate_failures = 0
            unclassifiable = 0
            for part, gf, uc in parts:
                assignments.update(part)
                gate_failures += gf
                unclassifiable += uc
        return Classification(
            label=config.label,
            assignments=assignments,
            config=config,
            gate_failures=gate_failures,
            unclassifiable=unclassifiable,
        )

    def _journal_entry_arrays(
        self, jid: int
    ) -> tuple[np.ndarray, np.ndarray] | None:
        if jid not in self._journal_vec_cache:
            rec = self.corpus.journals[jid]
            if not rec.assigned_codes:
                self._journal_vec_cache[jid] = None
            else:
                vec = fractionalize_journal(rec.assigned_codes, self.scheme)
                codes = np.fromiter(vec, dtype=np.int64, count=len(vec))
                vals = np.fromiter(vec.values(), dtype=np.float64, count=len(vec))
                self._journal_vec_cache[jid] = (codes, vals)
        return self._journal_vec_cache[jid]

    def baseline(self, threshold: float | None = None) -> Classification:
        """Journal-vector classification of every citable paper.

        Without a threshold each paper keeps its journal's full
        fractional vector; with one, the same chain rule and 5-category
        cap used for reference-based assignments apply.
        """
        corpus = self.corpus
        label = "ASJC" if threshold is None else f"ASJC-{threshold_label(threshold)}"
        assignments: dict[int, PaperAssignment] = {}
        unclassifiable = 0
        per_journal: dict[int, PaperAssignment | None] = {}
        rows = np.flatnonzero(corpus.citable_mask)
        pid_arr = corpus.paper_id_array
        jid_arr = corpus.journal_id_array
        for row in rows.tolist():
            jid = int(jid_arr[row])
            if jid not in per_journal:
                arrays = self._journal_entry_arrays(jid)
                if arrays is None:
                    per_journal[jid] = None
                elif threshold is None:
                    order = np.lexsort((arrays[0], -arrays[1]))
                    entries = tuple(
                        (int(arrays[0][i]), float(arrays[1][i])) for i in order
                    )
                    per_journal[jid] = PaperAssignment(entries, JOURNAL_FALLBACK)
                else:
                    entries = self._select_row(arrays[0], arrays[1], threshold, 5)
                    per_journal[jid] = PaperAssignment(entries, JOURNAL_FALLBACK)
            assignment = per_journal[jid]
            if assignment is None:
                unclassifiable += 1
            else:
                assignments[int(pid_arr[row])] = assignment
        return Classification(
            label=label,
            assignments=assignments,
            config=None,
            baseline_threshold=threshold,
            unclassifiable=unclassifiable,
        )


def classify_corpus(
    corpus: Corpus,
    scheme: CategoryScheme,
    config: ClassificationConfig,
    threads: int = 1,
) -> Classification:
    """One-shot corpus classification (builds a fresh engine).

    For many configurations over the same corpus, build one
    :class:`CorpusClassifier` and reuse it; the expensive sparse
    products are shared across configurations there.
    """
    return CorpusClassifier(corpus, scheme).classify(config, threads=threads)


def asjc_baseline(
    corpus: Corpus, scheme: CategoryScheme, threshold: float | None = None
) -> Classification:
    """One-shot journal-vector baseline classification."""
    return CorpusClassifier(corpus, scheme).baseline(threshold)


def default_grid() -> tuple[ClassificationConfig, ...]:
    """The 30 standard reference-based configurations.

    M1 has no averaged variant (averaging concerns the second
    generation), so the grid is 6 + 12 + 12 over the three default
    thresholds.
    """
    configs: list[ClassificationConfig] = []
    for scheme_id in SCHEME_IDS:
        for counting in COUNTING_METHODS:
            averaged_options = (False,) if scheme_id == "M1" else (False, True)
            for averaged in averaged_options:
                for threshold in DEFAULT_THRESHOLDS:
                    configs.append(
                        ClassificationConfig(
                            scheme_id=scheme_id,
                            counting=counting,
                            averaged=averaged,
                            threshold=threshold,
                        )
                    )
    return tuple(configs)
