"""Independent reference implementations used to cross-check the library.

Everything here re-derives the math from raw data: category
redistribution from the raw category rows, second-generation shares by
explicit enumeration of length-2 reference paths, selection by a
literal reading of the chain rule.  Only plain data accessors of the
library are used; none of its computational code paths are.
"""

from __future__ import annotations

from refclass.corpus import Corpus, JournalRecord, PaperRecord
from refclass.scheme import Area, Category, CategoryScheme

CHAIN_EPS = 1e-12
GEN1_WEIGHT = 0.618
GEN2_WEIGHT = 0.382


# -- fixture builders --------------------------------------------------------


def tiny_scheme(n_areas: int = 2, cats_per_area: int = 3) -> CategoryScheme:
    """Compact taxonomy: catch-all area 900, regular areas 100, 200, ...

    Area ``a`` has misc code ``100*a`` and targets ``100*a + i``.
    """
    categories = [Category(900, "catch-all", 900, True)]
    areas = [Area(900, "catch-all", True)]
    for a in range(1, n_areas + 1):
        base = 100 * a
        areas.append(Area(base, f"area {a}", False))
        categories.append(Category(base, f"area {a} misc", base, True))
        for i in range(1, cats_per_area + 1):
            categories.append(Category(base + i, f"cat {a}.{i}", base, False))
    return CategoryScheme(categories, areas)


def make_corpus(
    papers: list[tuple],
    journals: dict[int, set[int] | frozenset[int] | list[int]],
    edges: list[tuple[int, int]],
) -> Corpus:
    """papers: (pid, year, jid, citations, citable) tuples."""
    records = [PaperRecord(*p) for p in papers]
    journal_records = [
        JournalRecord(jid, frozenset(codes)) for jid, codes in journals.items()
    ]
    return Corpus.build(records, journal_records, edges)


# -- oracle: redistribution ---------------------------------------------------


def _raw_tables(scheme: CategoryScheme):
    cats = {c.code: c for c in scheme.categories}
    multi_areas = {a.area_code for a in scheme.areas if a.is_multidisciplinary}
    targets = sorted(
        c.code
        for c in scheme.categories
        if not c.is_misc and c.area_code not in multi_areas
    )
    by_area: dict[int, list[int]] = {}
    for t in targets:
        by_area.setdefault(cats[t].area_code, []).append(t)
    return cats, multi_areas, targets, by_area


def oracle_fractionalize(codes, scheme: CategoryScheme) -> dict[int, float]:
    cats, multi_areas, targets, by_area = _raw_tables(scheme)
    codes = sorted(set(codes))
    share = 1.0 / len(codes)
    out: dict[int, float] = {}
    for code in codes:
        cat = cats[code]
        if cat.area_code in multi_areas:
            for t in targets:
                out[t] = out.get(t, 0.0) + share / len(targets)
        elif cat.is_misc:
            sibs = by_area[cat.area_code]
            for t in sibs:
                out[t] = out.get(t, 0.0) + share / len(sibs)
        else:
            out[code] = out.get(code, 0.0) + share
    return out


def oracle_contribution(codes, counting: str, scheme: CategoryScheme) -> dict[int, float]:
    if not codes:
        return {}
    if counting == "FC":
        cats, multi_areas, _targets, _by_area = _raw_tables(scheme)
        return {
            c: 1.0
            for c in sorted(codes)
            if not cats[c].is_misc and cats[c].area_code not in multi_areas
        }
    return oracle_fractionalize(codes, scheme)


# -- oracle: share vectors by path enumeration -------------------------------


def _raw_refs(corpus: Corpus, pid: int) -> list[int]:
    row = corpus.row_of(pid)
    return [int(corpus.paper_id_array[r]) for r in corpus.ref_rows_of(row)]


def _norm(vec: dict[int, float]) -> dict[int, float]:
    total = sum(vec.values())
    return {k: v / total for k, v in vec.items()}


def oracle_paper_shares(
    corpus: Corpus,
    scheme: CategoryScheme,
    pid: int,
    scheme_id: str,
    counting: str,
    averaged: bool = False,
    min_active_refs: int = 3,
    gen1_weight: float = GEN1_WEIGHT,
    gen2_weight: float = GEN2_WEIGHT,
) -> dict[int, float] | None:
    """Share vector from explicit length-1 and length-2 path enumeration."""

    def contrib(p: int) -> dict[int, float]:
        rec = corpus.journals[corpus.paper(p).journal_id]
        return oracle_contribution(rec.assigned_codes, counting, scheme)

    refs = _raw_refs(corpus, pid)
    gen1 = [contrib(r) for r in refs]
    n1 = sum(1 for c in gen1 if c)
    per_parent: list[list[dict[int, float]]] = []
    n2 = 0
    for r in refs:
        children = [contrib(g) for g in _raw_refs(corpus, r) if g != pid]
        n2 += sum(1 for c in children if c)
        per_parent.append(children)

    gate = {"M1": n1, "M2": n2, "M3": n1 + n2}[scheme_id]
    if gate < max(min_active_refs, 1):
        return None

    def share1() -> dict[int, float]:
        acc: dict[int, float] = {}
        for c in gen1:
            for k, v in c.items():
                acc[k] = acc.get(k, 0.0) + v
        return _norm(acc)

    def share2() -> dict[int, float]:
        acc: dict[int, float] = {}
        for children in per_parent:
            active = [c for c in children if c]
            if not active:
                continue
            scale = 1.0 / len(active) if averaged else 1.0
            for c in active:
                for k, v in c.items():
                    acc[k] = acc.get(k, 0.0) + v * scale
        return _norm(acc)

    if scheme_id == "M1":
        return share1()
    if scheme_id == "M2":
        return share2()
    a = share1() if n1 else None
    b = share2() if n2 else None
    if a is None:
        return b
    if b is None:
        return a
    keys = set(a) | set(b)
    return {k: gen1_weight * a.get(k, 0.0) + gen2_weight * b.get(k, 0.0) for k in keys}


def oracle_usable_counts(
    corpus: Corpus, scheme: CategoryScheme, pid: int, counting: str
) -> tuple[int, int]:
    """(n1, n2) usable under the counting method, by direct recount."""
    cats, multi_areas, _targets, _by_area = _raw_tables(scheme)

    def usable(p: int) -> bool:
        codes = corpus.journals[corpus.paper(p).journal_id].assigned_codes
        if not codes:
            return False
        if counting == "WC":
            return True
        return any(
            not cats[c].is_misc and cats[c].area_code not in multi_areas
            for c in codes
        )

    refs = _raw_refs(corpus, pid)
    n1 = sum(1 for r in refs if usable(r))
    n2 = 0
    for r in refs:
        n2 += sum(1 for g in _raw_refs(corpus, r) if g != pid and usable(g))
    return n1, n2


def oracle_select(
    shares: dict[int, float], threshold: float, max_categories: int = 5
) -> list[tuple[int, float]]:
    ranked = sorted(shares.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = [ranked[0]]
    for code, w in ranked[1:]:
        if len(kept) >= max_categories:
            break
        if w < threshold * kept[-1][1] - CHAIN_EPS:
            break
        kept.append((code, w))
    total = sum(w for _c, w in kept)
    return [(c, w / total) for c, w in kept]


# -- comparisons --------------------------------------------------------------


def assert_vec_close(a, b, tol: float = 1e-12, msg: str = "") -> None:
    keys = set(a) | set(b)
    for k in keys:
        av = a.get(k, 0.0)
        bv = b.get(k, 0.0)
        assert abs(av - bv) <= tol, (
            f"{msg} key {k}: {av!r} vs {bv!r} (diff {abs(av - bv):.3e})"
        )


def share_families() -> list[tuple[str, str, bool]]:
    """The 10 distinct (scheme_id, counting, averaged) share families.

    The selection threshold never enters share computation, so checking
    these covers the share vectors of every grid configuration.
    """
    fams = []
    for scheme_id in ("M1", "M2", "M3"):
        for counting in ("FC", "WC"):
            options = (False,) if scheme_id == "M1" else (False, True)
            for averaged in options:
                fams.append((scheme_id, counting, averaged))
    return fams
