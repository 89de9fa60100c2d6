"""File formats: classification CSVs with sidecar metadata, truth files
and the tabular outputs of the evaluation pipeline.

Floats are written through ``str`` (shortest round-trip repr), so files
are byte-stable across platforms and reload to bit-identical values.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
from collections.abc import Iterable, Mapping, Sequence
from typing import Any

import numpy as np

from .classifier import (
    REFERENCE_BASED,
    Classification,
    ClassificationConfig,
    PaperAssignment,
)
from .metrics import (
    AssignmentProfile,
    ComparisonReport,
    LowReferenceReport,
    MiscRetention,
    NormalizedImpact,
    ReferenceCV,
    SizeStats,
)
from .scheme import CategoryScheme

_CLASSIFICATION_HEADER = ["paper_id", "rank", "category_code", "weight", "source"]
_TRUTH_HEADER = ["paper_id", "category_code"]


class ReportError(ValueError):
    """Malformed classification or truth file."""


def _write_rows(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(value: float | int | str | None) -> str | float | int:
    if value is None:
        return ""
    return value


def sidecar_path(csv_path: str) -> str:
    root, _ext = os.path.splitext(csv_path)
    return root + ".json"


# -- classification files ---------------------------------------------------


def write_classification(
    classification: Classification, csv_path: str, json_path: str | None = None
) -> None:
    """Write assignments sorted by (paper_id, rank) plus a JSON sidecar.

    The sidecar records the configuration and summary counts so the file
    pair round-trips through :func:`read_classification`.
    """
    rows = []
    for pid in sorted(classification.assignments):
        assignment = classification.assignments[pid]
        for rank, (code, weight) in enumerate(assignment.entries, start=1):
            rows.append([pid, rank, code, weight, assignment.source])
    _write_rows(csv_path, _CLASSIFICATION_HEADER, rows)

    sources = {a.source for a in classification.assignments.values()}
    meta: dict[str, Any] = {
        "label": classification.label,
        "config": (
            dataclasses.asdict(classification.config)
            if classification.config is not None
            else None
        ),
        "baseline_threshold": classification.baseline_threshold,
        "summary": {
            "n_papers": classification.n_papers,
            "gate_failures": classification.gate_failures,
            "unclassifiable": classification.unclassifiable,
            "sources": sorted(sources),
        },
    }
    path = json_path if json_path is not None else sidecar_path(csv_path)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_classification(
    csv_path: str, json_path: str | None = None
) -> Classification:
    """Reload a classification written by :func:`write_classification`.

    A missing sidecar degrades gracefully: the label falls back to the
    file stem and the configuration and counts are unknown.
    """
    per_paper: dict[int, list[tuple[int, int, float, str]]] = {}
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _CLASSIFICATION_HEADER:
            raise ReportError(
                f"{csv_path}:1: expected header "
                f"{','.join(_CLASSIFICATION_HEADER)!r}, got {header!r}"
            )
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise ReportError(f"{csv_path}:{line}: expected 5 columns")
            try:
                pid = int(row[0])
                rank = int(row[1])
                code = int(row[2])
                weight = float(row[3])
            except ValueError as exc:
                raise ReportError(f"{csv_path}:{line}: {exc}") from None
            per_paper.setdefault(pid, []).append((rank, code, weight, row[4]))
    assignments: dict[int, PaperAssignment] = {}
    for pid, items in per_paper.items():
        items.sort(key=lambda t: t[0])
        if [t[0] for t in items] != list(range(1, len(items) + 1)):
            raise ReportError(f"{csv_path}: paper {pid} has non-contiguous ranks")
        sources = {t[3] for t in items}
        if len(sources) != 1:
            raise ReportError(f"{csv_path}: paper {pid} mixes sources")
        assignments[pid] = PaperAssignment(
            entries=tuple((code, weight) for _r, code, weight, _s in items),
            source=items[0][3],
        )

    label = os.path.splitext(os.path.basename(csv_path))[0]
    config = None
    baseline_threshold = None
    gate_failures = 0
    unclassifiable = 0
    meta_path = json_path if json_path is not None else sidecar_path(csv_path)
    if os.path.exists(meta_path):
        with open(meta_path, encoding="utf-8") as fh:
            meta = json.load(fh)
        label = meta.get("label", label)
        if meta.get("config") is not None:
            config = ClassificationConfig(**meta["config"])
        baseline_threshold = meta.get("baseline_threshold")
        summary = meta.get("summary", {})
        gate_failures = summary.get("gate_failures", 0)
        unclassifiable = summary.get("unclassifiable", 0)
    return Classification(
        label=label,
        assignments=assignments,
        config=config,
        baseline_threshold=baseline_threshold,
        gate_failures=gate_failures,
        unclassifiable=unclassifiable,
    )


# -- truth files -------------------------------------------------------------


def write_truth(truth: Mapping[int, int], path: str) -> None:
    _write_rows(
        path, _TRUTH_HEADER, ([pid, truth[pid]] for pid in sorted(truth))
    )


def read_truth(path: str) -> dict[int, int]:
    out: dict[int, int] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _TRUTH_HEADER:
            raise ReportError(
                f"{path}:1: expected header {','.join(_TRUTH_HEADER)!r}, "
                f"got {header!r}"
            )
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                pid = int(row[0])
                code = int(row[1])
            except (ValueError, IndexError) as exc:
                raise ReportError(f"{path}:{line}: {exc}") from None
            if pid in out:
                raise ReportError(f"{path}:{line}: duplicate paper id {pid}")
            out[pid] = code
    return out


def truth_classification(truth: Mapping[int, int], label: str = "gold") -> Classification:
    """Degenerate single-category classification from planted truth."""
    return Classification(
        label=label,
        assignments={
            pid: PaperAssignment(((truth[pid], 1.0),), REFERENCE_BASED)
            for pid in sorted(truth)
        },
    )


def is_truth_file(path: str) -> bool:
    """Check the header to tell a truth file from a classification CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh), None)
    return header == _TRUTH_HEADER


def load_gold(path: str) -> Classification:
    """Load a gold standard from either file format."""
    if is_truth_file(path):
        return truth_classification(read_truth(path))
    return read_classification(path)


# -- table emitters ----------------------------------------------------------


def classification_kind_fields(classification: Classification) -> tuple[str, str, str]:
    """(scheme, counting, threshold) label columns for summary tables."""
    config = classification.config
    if config is not None:
        from .classifier import threshold_label

        return config.scheme_id, config.counting_label, threshold_label(config.threshold)
    if classification.baseline_threshold is not None:
        from .classifier import threshold_label

        return "ASJC", "-", threshold_label(classification.baseline_threshold)
    return "ASJC", "-", "-"


def write_active_reference_table(
    path: str, rows: Sequence[tuple[int, float, float, float]]
) -> None:
    _write_rows(
        path,
        ["n", "pct_gen1_above", "pct_gen2_above", "pct_both_above"],
        rows,
    )


def write_low_reference_table(path: str, report: LowReferenceReport) -> None:
    header = [
        "area_code",
        "area_name",
        "total_weight",
        "gen1_weight",
        "gen1_pct",
        "gen1_mean_ni",
        "gen2_weight",
        "gen2_pct",
        "gen2_mean_ni",
        "both_weight",
        "both_pct",
        "both_mean_ni",
    ]
    rows = []
    for row in list(report.rows) + [report.summary]:
        rows.append(
            [
                row.area_code,
                row.area_name,
                row.total_weight,
                row.gen1.weight,
                row.gen1.pct,
                _fmt(row.gen1.mean_ni),
                row.gen2.weight,
                row.gen2.pct,
                _fmt(row.gen2.mean_ni),
                row.both.weight,
                row.both.pct,
                _fmt(row.both.mean_ni),
            ]
        )
    _write_rows(path, header, rows)


def write_size_stats_table(
    path: str, items: Sequence[tuple[Classification, SizeStats]]
) -> None:
    header = [
        "label",
        "scheme",
        "counting",
        "threshold",
        "n_categories",
        "total_weight",
        "max_size",
        "min_size",
        "cv",
        "granularity",
    ]
    rows = []
    for classification, stats in items:
        scheme_id, counting, threshold = classification_kind_fields(classification)
        rows.append(
            [
                classification.label,
                scheme_id,
                counting,
                threshold,
                stats.n_categories,
                stats.total_weight,
                stats.max_size,
                stats.min_size,
                stats.cv,
                stats.granularity,
            ]
        )
    _write_rows(path, header, rows)


def write_reference_cv_table(
    path: str,
    items: Sequence[tuple[str, Mapping[tuple[str, str], ReferenceCV]]],
) -> None:
    combos = [
        ("resolved_only", "all"),
        ("resolved_only", "prev2"),
        ("resolved_only", "prev3"),
        ("all_refs", "all"),
        ("all_refs", "prev2"),
        ("all_refs", "prev3"),
    ]
    header = ["label"] + [f"{scope}_{window}" for scope, window in combos]
    rows = []
    for label, values in items:
        rows.append([label] + [values[c].value for c in combos])
    _write_rows(path, header, rows)


def write_assignment_profile_table(
    path: str, items: Sequence[tuple[str, AssignmentProfile]]
) -> None:
    header = [
        "label",
        "n_papers",
        "avg_categories",
        "pct_1",
        "pct_2",
        "pct_3",
        "pct_4",
        "pct_5_plus",
    ]
    rows = [
        [label, p.n_papers, p.avg_categories, *p.pct_by_count]
        for label, p in items
    ]
    _write_rows(path, header, rows)


def write_area_distribution_table(
    path: str,
    scheme: CategoryScheme,
    items: Sequence[tuple[str, Mapping[int, float]]],
) -> None:
    header = ["area_code", "area_name"] + [label for label, _d in items]
    areas = [a for a in scheme.areas if not a.is_multidisciplinary]
    rows = []
    for area in sorted(areas, key=lambda a: a.area_code):
        rows.append(
            [area.area_code, area.name]
            + [dist.get(area.area_code, 0.0) for _label, dist in items]
        )
    _write_rows(path, header, rows)


def write_category_size_table(
    path: str,
    scheme: CategoryScheme,
    items: Sequence[tuple[str, Mapping[int, float]]],
) -> None:
    header = ["category_code", "area_code"] + [label for label, _s in items]
    rows = []
    for code in scheme.targets:
        rows.append(
            [code, scheme.area_of(code)]
            + [sizes.get(code, 0.0) for _label, sizes in items]
        )
    _write_rows(path, header, rows)


def write_matrix_table(
    path: str, labels: Sequence[str], matrix: np.ndarray
) -> None:
    header = ["label"] + list(labels)
    rows = [
        [labels[i]] + [float(matrix[i, j]) for j in range(len(labels))]
        for i in range(len(labels))
    ]
    _write_rows(path, header, rows)


def write_gold_comparison_table(
    path: str, items: Sequence[tuple[str, ComparisonReport]]
) -> None:
    header = [
        "label",
        "coincidence_pct",
        "avg_rank_gold_in_test",
        "missing_gold_in_test_pct",
        "avg_rank_test_in_gold",
        "missing_test_in_gold_pct",
        "n_common",
    ]
    rows = [
        [
            label,
            report.coincidence_pct,
            _fmt(report.avg_rank_gold_in_test),
            report.missing_gold_in_test_pct,
            _fmt(report.avg_rank_test_in_gold),
            report.missing_test_in_gold_pct,
            report.n_common,
        ]
        for label, report in items
    ]
    _write_rows(path, header, rows)


def write_misc_retention_table(
    path: str,
    scheme: CategoryScheme,
    items: Sequence[tuple[str, Mapping[int, MiscRetention]]],
) -> None:
    header = ["label", "area_code", "area_name", "n_papers", "retention_pct"]
    rows = []
    for label, retention in items:
        for area_code, cell in sorted(retention.items()):
            rows.append(
                [
                    label,
                    area_code,
                    scheme.area_by_code[area_code].name,
                    cell.n_papers,
                    cell.retention_pct,
                ]
            )
    _write_rows(path, header, rows)


def write_normalized_impact_table(
    path: str, items: Sequence[tuple[str, NormalizedImpact]]
) -> None:
    header = ["label", "overall_mean", "flagged_infinite"]
    rows = [
        [label, ni.overall_mean, ni.flagged_infinite] for label, ni in items
    ]
    _write_rows(path, header, rows)


def write_categories_per_year_table(
    path: str, items: Sequence[tuple[str, Mapping[int, float]]]
) -> None:
    years = sorted({y for _label, per_year in items for y in per_year})
    header = ["year"] + [label for label, _p in items]
    rows = [
        [year] + [per_year.get(year, "") for _label, per_year in items]
        for year in years
    ]
    _write_rows(path, header, rows)


def write_weight_band_table(
    path: str, items: Sequence[tuple[str, Sequence[tuple[str, int]]]]
) -> None:
    if not items:
        raise ValueError("no classifications given")
    bands = [band for band, _n in items[0][1]]
    header = ["band_upper_pct"] + [label for label, _b in items]
    by_label = [dict(bandlist) for _label, bandlist in items]
    rows = [[band] + [d[band] for d in by_label] for band in bands]
    _write_rows(path, header, rows)


def write_report_json(path: str, payload: Mapping[str, Any]) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
