"""Immutable paper/journal/reference store with generation queries.

The reference graph is kept as a row-compressed adjacency over paper
rows, preserving edge-file order and multiplicity (a paper cited twice
appears twice).  References to papers outside the corpus are not edges;
they are tallied per citing paper in ``unresolved_ref_counts``.
"""

from __future__ import annotations

import csv
import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .scheme import CategoryScheme

log = logging.getLogger(__name__)

_PAPER_HEADER = ["paper_id", "year", "journal_id", "citations", "is_citable"]
_JOURNAL_HEADER = ["journal_id", "codes"]
_EDGE_HEADER = ["src_paper_id", "dst_paper_id"]

_ID_MIN = -(2**63)
_ID_MAX = 2**63 - 1


class CorpusError(ValueError):
    """Malformed corpus file or referential-integrity violation."""


@dataclass(frozen=True)
class PaperRecord:
    paper_id: int
    year: int
    journal_id: int
    citations: int
    is_citable: bool


@dataclass(frozen=True)
class JournalRecord:
    journal_id: int
    assigned_codes: frozenset[int]


def _check_id(value: int, what: str, where: str) -> int:
    if not _ID_MIN <= value <= _ID_MAX:
        raise CorpusError(f"{where}: {what} {value} causes ID-space overflow")
    return value


class Corpus:
    """Columnar store of papers, journals and resolved reference edges.

    Read-only after construction; query methods are safe for concurrent
    use.  Derived sparse structures (adjacency matrix, active-reference
    count vectors) are built lazily and cached.
    """

    def __init__(
        self,
        papers: Sequence[PaperRecord],
        journals: dict[int, JournalRecord],
        ref_indptr: np.ndarray,
        ref_rows: np.ndarray,
        unresolved: dict[int, int],
        skipped_edges: int = 0,
    ):
        n = len(papers)
        self._pid = np.fromiter((p.paper_id for p in papers), dtype=np.int64, count=n)
        self._year = np.fromiter((p.year for p in papers), dtype=np.int64, count=n)
        self._jid = np.fromiter((p.journal_id for p in papers), dtype=np.int64, count=n)
        self._cit = np.fromiter((p.citations for p in papers), dtype=np.int64, count=n)
        self._citable = np.fromiter(
            (p.is_citable for p in papers), dtype=np.bool_, count=n
        )
        self._row_of: dict[int, int] = {}
        for i, pid in enumerate(self._pid.tolist()):
            if pid in self._row_of:
                raise CorpusError(f"duplicate paper id {pid}")
            self._row_of[pid] = i
        self.journals: dict[int, JournalRecord] = dict(journals)
        for rec in papers:
            if rec.journal_id not in self.journals:
                raise CorpusError(
                    f"paper {rec.paper_id} references unknown journal {rec.journal_id}"
                )
        self._ref_indptr = np.asarray(ref_indptr, dtype=np.int64)
        self._ref_rows = np.asarray(ref_rows, dtype=np.int64)
        if self._ref_indptr.shape != (n + 1,):
            raise CorpusError("adjacency index does not match paper count")
        self.unresolved_ref_counts: dict[int, int] = dict(unresolved)
        self.skipped_edges = skipped_edges
        for arr in (self._pid, self._year, self._jid, self._cit, self._citable,
                    self._ref_indptr, self._ref_rows):
            arr.flags.writeable = False
        self._ref_matrix: sparse.csr_matrix | None = None
        self._mutual_diag: np.ndarray | None = None
        self._active_arrays: tuple[np.ndarray, np.ndarray] | None = None

    # -- construction ------------------------------------------------

    @classmethod
    def build(
        cls,
        papers: Iterable[PaperRecord],
        journals: Iterable[JournalRecord],
        edges: Iterable[tuple[int, int]],
        *,
        source_name: str = "<memory>",
    ) -> "Corpus":
        """Assemble a corpus from in-memory records.

        Edge handling matches file ingest: unknown source papers are
        skipped with a warning, references to unknown targets become
        unresolved counts on the citing paper.
        """
        paper_list = list(papers)
        journal_map: dict[int, JournalRecord] = {}
        for rec in journals:
            if rec.journal_id in journal_map:
                raise CorpusError(f"duplicate journal id {rec.journal_id}")
            journal_map[rec.journal_id] = rec
        row_of = {p.paper_id: i for i, p in enumerate(paper_list)}
        if len(row_of) != len(paper_list):
            seen: set[int] = set()
            for p in paper_list:
                if p.paper_id in seen:
                    raise CorpusError(f"duplicate paper id {p.paper_id}")
                seen.add(p.paper_id)
        src_rows: list[int] = []
        dst_rows: list[int] = []
        unresolved: dict[int, int] = {}
        skipped = 0
        for src, dst in edges:
            src_row = row_of.get(src)
            if src_row is None:
                skipped += 1
                continue
            dst_row = row_of.get(dst)
            if dst_row is None:
                unresolved[src] = unresolved.get(src, 0) + 1
                continue
            src_rows.append(src_row)
            dst_rows.append(dst_row)
        if skipped:
            log.warning(
                "%s: skipped %d reference edge(s) with unknown source paper",
                source_name,
                skipped,
            )
        indptr, rows = _pack_adjacency(len(paper_list), src_rows, dst_rows)
        return cls(paper_list, journal_map, indptr, rows, unresolved, skipped)

    # -- basic access ------------------------------------------------

    @property
    def n_papers(self) -> int:
        return len(self._pid)

    @property
    def n_edges(self) -> int:
        return int(self._ref_indptr[-1])

    @property
    def paper_id_array(self) -> np.ndarray:
        return self._pid

    @property
    def year_array(self) -> np.ndarray:
        return self._year

    @property
    def citation_array(self) -> np.ndarray:
        return self._cit

    @property
    def journal_id_array(self) -> np.ndarray:
        return self._jid

    @property
    def citable_mask(self) -> np.ndarray:
        return self._citable

    @property
    def n_citable(self) -> int:
        return int(self._citable.sum())

    def __contains__(self, paper_id: int) -> bool:
        return paper_id in self._row_of

    def row_of(self, paper_id: int) -> int:
        """Dense row index of a paper id (KeyError if absent)."""
        return self._row_of[paper_id]

    def paper(self, paper_id: int) -> PaperRecord:
        i = self._row_of[paper_id]
        return PaperRecord(
            paper_id=int(self._pid[i]),
            year=int(self._year[i]),
            journal_id=int(self._jid[i]),
            citations=int(self._cit[i]),
            is_citable=bool(self._citable[i]),
        )

    def journal(self, journal_id: int) -> JournalRecord:
        return self.journals[journal_id]

    def journal_of_paper(self, paper_id: int) -> JournalRecord:
        return self.journals[int(self._jid[self._row_of[paper_id]])]

    def ref_rows_of(self, row: int) -> np.ndarray:
        """Adjacency slice (target rows) of a paper row, edge order kept."""
        return self._ref_rows[self._ref_indptr[row] : self._ref_indptr[row + 1]]

    # -- derived structures -------------------------------------------

    def ref_matrix(self) -> sparse.csr_matrix:
        """Paper-by-paper reference matrix; entry (p, r) = multiplicity."""
        if self._ref_matrix is None:
            n = self.n_papers
            counts = np.diff(self._ref_indptr)
            src = np.repeat(np.arange(n, dtype=np.int64), counts)
            mat = sparse.coo_matrix(
                (np.ones(len(self._ref_rows)), (src, self._ref_rows)),
                shape=(n, n),
            ).tocsr()
            mat.sum_duplicates()
            self._ref_matrix = mat
        return self._ref_matrix

    def mutual_citation_diag(self) -> np.ndarray:
        """k[p] = sum_r R[p,r]*R[r,p]; nonzero only on citation cycles."""
        if self._mutual_diag is None:
            r = self.ref_matrix()
            self._mutual_diag = np.asarray(
                r.multiply(r.T).sum(axis=1)
            ).ravel()
        return self._mutual_diag

    def active_count_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-row active reference counts (n1, n2).

        A reference is active when its journal carries at least one
        category code of any kind.  Second-generation counts exclude the
        focal paper from its parents' reference lists.
        """
        if self._active_arrays is None:
            flags = {
                jid: bool(rec.assigned_codes) for jid, rec in self.journals.items()
            }
            act = np.fromiter(
                (flags[int(j)] for j in self._jid), dtype=np.float64,
                count=self.n_papers,
            )
            r = self.ref_matrix()
            n1 = r @ act
            n2 = r @ n1 - self.mutual_citation_diag() * act
            self._active_arrays = (np.rint(n1).astype(np.int64),
                                   np.rint(n2).astype(np.int64))
        return self._active_arrays

    # -- equality ------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Corpus):
            return NotImplemented
        if sorted(self._row_of) != sorted(other._row_of):
            return False
        for pid in self._row_of:
            if self.paper(pid) != other.paper(pid):
                return False
            mine = self._pid[self.ref_rows_of(self.row_of(pid))].tolist()
            theirs = other._pid[other.ref_rows_of(other.row_of(pid))].tolist()
            if mine != theirs:
                return False
        return (
            self.journals == other.journals
            and self.unresolved_ref_counts == other.unresolved_ref_counts
        )

    def __repr__(self) -> str:
        return (
            f"Corpus({self.n_papers} papers, {len(self.journals)} journals, "
            f"{self.n_edges} edges)"
        )


def _pack_adjacency(
    n: int, src_rows: Sequence[int], dst_rows: Sequence[int]
) -> tuple[np.ndarray, np.ndarray]:
    """Group edges by source row, preserving input order within a source."""
    src = np.asarray(src_rows, dtype=np.int64)
    dst = np.asarray(dst_rows, dtype=np.int64)
    order = np.argsort(src, kind="stable")
    counts = np.bincount(src, minlength=n) if len(src) else np.zeros(n, dtype=np.int64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, dst[order]


# -- ingest ------------------------------------------------------------


def _read_rows(path: str, header: list[str]):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        got = next(reader, None)
        if got != header:
            raise CorpusError(
                f"{path}:1: expected header {','.join(header)!r}, got {got!r}"
            )
        for line, row in enumerate(reader, start=2):
            if row:
                yield line, row


def _parse_int(text: str, path: str, line: int, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise CorpusError(f"{path}:{line}: {what} must be an integer, got {text!r}") from None


def ingest(
    paper_path: str,
    journal_path: str,
    edge_path: str,
    scheme: CategoryScheme,
) -> Corpus:
    """Load a corpus from its three CSV files.

    Journal category codes are validated against the scheme.  Edges with
    an unknown source paper are skipped with a warning; edges to unknown
    targets increment the source's unresolved count.  Papers appear in
    file order; re-emitting via :func:`emit_corpus` yields the canonical
    sorted form.
    """
    journals: dict[int, JournalRecord] = {}
    for line, row in _read_rows(journal_path, _JOURNAL_HEADER):
        if len(row) != 2:
            raise CorpusError(f"{journal_path}:{line}: expected 2 columns")
        jid = _check_id(
            _parse_int(row[0], journal_path, line, "journal_id"),
            "journal id", f"{journal_path}:{line}",
        )
        if jid in journals:
            raise CorpusError(f"{journal_path}:{line}: duplicate journal id {jid}")
        codes: set[int] = set()
        if row[1]:
            for part in row[1].split(";"):
                code = _parse_int(part, journal_path, line, "category code")
                if code not in scheme.category_by_code:
                    raise CorpusError(
                        f"{journal_path}:{line}: journal {jid} has unknown "
                        f"category code {code}"
                    )
                codes.add(code)
        journals[jid] = JournalRecord(jid, frozenset(codes))

    papers: list[PaperRecord] = []
    seen: set[int] = set()
    for line, row in _read_rows(paper_path, _PAPER_HEADER):
        if len(row) != 5:
            raise CorpusError(f"{paper_path}:{line}: expected 5 columns")
        where = f"{paper_path}:{line}"
        pid = _check_id(_parse_int(row[0], paper_path, line, "paper_id"), "paper id", where)
        if pid in seen:
            raise CorpusError(f"{where}: duplicate paper id {pid}")
        seen.add(pid)
        year = _parse_int(row[1], paper_path, line, "year")
        jid = _parse_int(row[2], paper_path, line, "journal_id")
        if jid not in journals:
            raise CorpusError(f"{where}: paper {pid} references unknown journal {jid}")
        citations = _parse_int(row[3], paper_path, line, "citations")
        if citations < 0:
            raise CorpusError(f"{where}: citations must be non-negative")
        if row[4] not in ("0", "1"):
            raise CorpusError(f"{where}: is_citable must be 0 or 1, got {row[4]!r}")
        papers.append(PaperRecord(pid, year, jid, citations, row[4] == "1"))

    edges: list[tuple[int, int]] = []
    for line, row in _read_rows(edge_path, _EDGE_HEADER):
        if len(row) != 2:
            raise CorpusError(f"{edge_path}:{line}: expected 2 columns")
        src = _parse_int(row[0], edge_path, line, "src_paper_id")
        dst = _parse_int(row[1], edge_path, line, "dst_paper_id")
        edges.append((src, dst))

    return Corpus.build(papers, journals.values(), edges, source_name=edge_path)


def emit_corpus(corpus: Corpus, out_dir: str) -> None:
    """Write papers.csv, journals.csv and edges.csv in canonical form.

    Canonical: papers and journals sorted by id, journal codes sorted and
    semicolon-joined, edges sorted by source id with each source's
    targets in stored order.  Unresolved reference counts have no file
    representation, so a corpus that had unresolved references does not
    survive a round trip unchanged.
    """
    import os

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "papers.csv"), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_PAPER_HEADER)
        for pid in sorted(corpus._row_of):
            rec = corpus.paper(pid)
            writer.writerow(
                [rec.paper_id, rec.year, rec.journal_id, rec.citations,
                 int(rec.is_citable)]
            )
    with open(os.path.join(out_dir, "journals.csv"), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_JOURNAL_HEADER)
        for jid in sorted(corpus.journals):
            codes = ";".join(str(c) for c in sorted(corpus.journals[jid].assigned_codes))
            writer.writerow([jid, codes])
    with open(os.path.join(out_dir, "edges.csv"), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_EDGE_HEADER)
        for pid in sorted(corpus._row_of):
            row = corpus.row_of(pid)
            for dst_row in corpus.ref_rows_of(row).tolist():
                writer.writerow([pid, int(corpus.paper_id_array[dst_row])])


# -- generation queries -------------------------------------------------


def first_generation(corpus: Corpus, paper_id: int) -> list[int]:
    """Cited paper ids of a paper, edge order and multiplicity preserved."""
    row = corpus.row_of(paper_id)
    return corpus.paper_id_array[corpus.ref_rows_of(row)].tolist()


def second_generation(corpus: Corpus, paper_id: int) -> list[tuple[int, list[int]]]:
    """References-of-references, grouped per first-generation occurrence.

    Each element is ``(parent_id, children_ids)`` where children are the
    parent's references with every occurrence of the focal paper removed
    (a paper never contributes to its own second generation through a
    citation cycle).
    """
    out: list[tuple[int, list[int]]] = []
    for parent in first_generation(corpus, paper_id):
        children = [g for g in first_generation(corpus, parent) if g != paper_id]
        out.append((parent, children))
    return out


def active_reference_counts(
    corpus: Corpus, scheme: CategoryScheme, paper_id: int
) -> tuple[int, int, int]:
    """(n1, n2, n1+n2) active reference counts of one paper.

    A reference is active when its journal carries at least one category
    code (codes were validated against the scheme at ingest, so any code
    makes the journal classifiable at least fractionally).
    """
    del scheme  # activity only needs the journal's code set
    n1 = 0
    for rid in first_generation(corpus, paper_id):
        n1 += bool(corpus.journal_of_paper(rid).assigned_codes)
    n2 = 0
    for _parent, children in second_generation(corpus, paper_id):
        for gid in children:
            n2 += bool(corpus.journal_of_paper(gid).assigned_codes)
    return n1, n2, n1 + n2


def active_reference_distribution(
    corpus: Corpus, scheme: CategoryScheme
) -> list[tuple[int, float, float, float]]:
    """Share of citable papers with more than N active references.

    Returns rows ``(N, pct_gen1, pct_gen2, pct_both)`` for N = 0..9,
    percentages over citable papers.
    """
    del scheme
    citable = corpus.citable_mask
    total = int(citable.sum())
    if total == 0:
        raise CorpusError("empty corpus")
    n1, n2 = corpus.active_count_arrays()
    n1 = n1[citable]
    n2 = n2[citable]
    n12 = n1 + n2
    rows = []
    for n in range(10):
        rows.append(
            (
                n,
                100.0 * float((n1 > n).sum()) / total,
                100.0 * float((n2 > n).sum()) / total,
                100.0 * float((n12 > n).sum()) / total,
            )
        )
    return rows
