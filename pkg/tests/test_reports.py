from __future__ import annotations

import csv
import json

import pytest

from refclass.classifier import (
    ClassificationConfig,
    asjc_baseline,
    classify_corpus,
)
from refclass.metrics import (
    low_reference_report,
    reference_cv,
    size_stats,
)
from refclass.reports import (
    ReportError,
    classification_kind_fields,
    is_truth_file,
    load_gold,
    read_classification,
    read_truth,
    sidecar_path,
    truth_classification,
    write_classification,
    write_gold_comparison_table,
    write_low_reference_table,
    write_reference_cv_table,
    write_size_stats_table,
    write_truth,
)


def _read_table(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


@pytest.fixture(scope="module")
def classified(noisy_small):
    config = ClassificationConfig("M3", "WC", averaged=True, threshold=0.8)
    return classify_corpus(noisy_small.corpus, noisy_small.scheme, config)


class TestClassificationIO:
    def test_round_trip(self, tmp_path, classified):
        path = tmp_path / "m3.csv"
        write_classification(classified, str(path))
        loaded = read_classification(str(path))
        assert loaded.label == classified.label
        assert loaded.config == classified.config
        assert loaded.gate_failures == classified.gate_failures
        assert loaded.unclassifiable == classified.unclassifiable
        assert set(loaded.assignments) == set(classified.assignments)
        for pid, expect in classified.assignments.items():
            got = loaded.assignments[pid]
            assert got.source == expect.source
            assert [c for c, _ in got.entries] == [c for c, _ in expect.entries]
            for (_c1, w1), (_c2, w2) in zip(got.entries, expect.entries):
                # weights pass through repr(float): exact round trip
                assert w1 == w2

    def test_baseline_round_trip(self, tmp_path, noisy_small):
        baseline = asjc_baseline(noisy_small.corpus, noisy_small.scheme, 0.5)
        path = tmp_path / "asjc.csv"
        write_classification(baseline, str(path))
        loaded = read_classification(str(path))
        assert loaded.label == "ASJC-0.5"
        assert loaded.config is None
        assert loaded.baseline_threshold == 0.5

    def test_sidecar_path(self):
        assert sidecar_path("/x/y/foo.csv") == "/x/y/foo.json"

    def test_missing_sidecar_degrades(self, tmp_path, classified):
        path = tmp_path / "nolabel.csv"
        write_classification(classified, str(path))
        sidecar_path(str(path)) and (tmp_path / "nolabel.json").unlink()
        loaded = read_classification(str(path))
        assert loaded.label == "nolabel"
        assert loaded.config is None

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("paper,rank\n1,1\n")
        with pytest.raises(ReportError, match="expected header"):
            read_classification(str(path))

    def test_non_contiguous_ranks_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(
            "paper_id,rank,category_code,weight,source\n"
            "1,1,101,0.5,reference_based\n"
            "1,3,102,0.5,reference_based\n"
        )
        with pytest.raises(ReportError, match="non-contiguous ranks"):
            read_classification(str(path))

    def test_mixed_sources_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(
            "paper_id,rank,category_code,weight,source\n"
            "1,1,101,0.5,reference_based\n"
            "1,2,102,0.5,journal_fallback\n"
        )
        with pytest.raises(ReportError, match="mixes sources"):
            read_classification(str(path))

    def test_sidecar_is_stable_json(self, tmp_path, classified):
        path = tmp_path / "c.csv"
        write_classification(classified, str(path))
        meta = json.loads((tmp_path / "c.json").read_text())
        assert meta["label"] == classified.label
        assert meta["config"]["scheme_id"] == "M3"
        assert meta["summary"]["n_papers"] == classified.n_papers


class TestTruthIO:
    def test_round_trip(self, tmp_path, noisy_small):
        path = tmp_path / "truth.csv"
        write_truth(noisy_small.truth, str(path))
        assert read_truth(str(path)) == noisy_small.truth

    def test_duplicate_rejected(self, tmp_path):
        path = tmp_path / "truth.csv"
        path.write_text("paper_id,category_code\n1,101\n1,102\n")
        with pytest.raises(ReportError, match="duplicate paper id"):
            read_truth(str(path))

    def test_load_gold_detects_format(self, tmp_path, noisy_small, classified):
        truth_path = tmp_path / "truth.csv"
        write_truth(noisy_small.truth, str(truth_path))
        assert is_truth_file(str(truth_path))
        gold = load_gold(str(truth_path))
        assert gold.label == "gold"
        assert gold.assignments[1].entries[0][1] == 1.0

        cls_path = tmp_path / "cls.csv"
        write_classification(classified, str(cls_path))
        assert not is_truth_file(str(cls_path))
        loaded = load_gold(str(cls_path))
        assert loaded.label == classified.label

    def test_truth_classification_matches_gold(self, noisy_small):
        rebuilt = truth_classification(noisy_small.truth)
        for pid, assignment in noisy_small.gold.assignments.items():
            assert rebuilt.assignments[pid].entries == assignment.entries


class TestKindFields:
    def test_reference_based(self, classified):
        assert classification_kind_fields(classified) == ("M3", "AWC", "0.8")

    def test_baseline(self, noisy_small):
        plain = asjc_baseline(noisy_small.corpus, noisy_small.scheme)
        cut = asjc_baseline(noisy_small.corpus, noisy_small.scheme, 2 / 3)
        assert classification_kind_fields(plain) == ("ASJC", "-", "-")
        assert classification_kind_fields(cut) == ("ASJC", "-", "0.67")


class TestTables:
    def test_size_stats_table(self, tmp_path, classified, noisy_small):
        baseline = asjc_baseline(noisy_small.corpus, noisy_small.scheme)
        path = tmp_path / "sizes.csv"
        write_size_stats_table(
            str(path),
            [(classified, size_stats(classified)), (baseline, size_stats(baseline))],
        )
        header, rows = _read_table(path)
        assert header[0] == "label"
        assert len(rows) == 2
        stats = size_stats(classified)
        assert rows[0][0] == classified.label
        assert float(rows[0][header.index("granularity")]) == pytest.approx(
            stats.granularity
        )

    def test_reference_cv_table(self, tmp_path, classified, noisy_small):
        combos = [
            (scope, window)
            for scope in ("resolved_only", "all_refs")
            for window in ("all", "prev2", "prev3")
        ]
        values = {
            c: reference_cv(classified, noisy_small.corpus, *c) for c in combos
        }
        path = tmp_path / "cv.csv"
        write_reference_cv_table(str(path), [(classified.label, values)])
        header, rows = _read_table(path)
        assert len(rows) == 1
        assert len(header) == 7  # label + 2 scopes x 3 windows
        col = header.index("all_refs_all")
        assert float(rows[0][col]) == pytest.approx(
            values[("all_refs", "all")].value
        )

    def test_low_reference_table(self, tmp_path, noisy_small):
        corpus, scheme = noisy_small.corpus, noisy_small.scheme
        report = low_reference_report(corpus, scheme, asjc_baseline(corpus, scheme))
        path = tmp_path / "low.csv"
        write_low_reference_table(str(path), report)
        header, rows = _read_table(path)
        assert rows[-1][0] == "-1"  # summary row last
        assert len(rows) == len(report.rows) + 1

    def test_gold_comparison_table(self, tmp_path, classified, noisy_small):
        from refclass.metrics import compare_classifications

        report = compare_classifications(classified, noisy_small.gold)
        path = tmp_path / "gold.csv"
        write_gold_comparison_table(str(path), [(classified.label, report)])
        header, rows = _read_table(path)
        assert len(rows) == 1
        assert 0.0 <= float(rows[0][header.index("coincidence_pct")]) <= 100.0
