"""Command line pipeline: ingest, classify, evaluate, compare, synth, report.

Settings resolve in precedence order: command-line flags, then
``REFCLASS_*`` environment variables, then the ``--config`` file (TOML
or JSON), then defaults.  Exit codes: 0 success, 2 usage or data errors
(including missing files), 3 an empty paper intersection during
comparison.
"""

from __future__ import annotations

import argparse
import dataclasses
import glob
import json
import logging
import os
import sys
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import Any

import numpy as np

try:
    import tomllib  # type: ignore[import-not-found]
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib  # type: ignore[no-redef]

from . import metrics, reports
from .classifier import (
    DEFAULT_BASELINE_THRESHOLDS,
    Classification,
    ClassificationConfig,
    CorpusClassifier,
    default_grid,
)
from .corpus import Corpus, CorpusError, active_reference_distribution, emit_corpus, ingest
from .reports import ReportError
from .scheme import CategoryScheme, SchemeError, load_scheme
from .synthgen import SynthesisError, SynthParams, emit_synth, generate

EXIT_OK = 0
EXIT_ERROR = 2
EXIT_EMPTY_INTERSECTION = 3
ENV_PREFIX = "REFCLASS_"

log = logging.getLogger(__name__)


class CliError(Exception):
    """User-facing failure; message printed, exit code 2."""


class Settings:
    """Layered lookup over flags, environment and a config file."""

    def __init__(self, args: argparse.Namespace):
        self._args = vars(args)
        self._file: dict[str, Any] = {}
        config_path = self._args.get("config") or os.environ.get(
            ENV_PREFIX + "CONFIG"
        )
        if config_path:
            self._file = _load_config_file(config_path)

    def get(self, key: str, default: Any = None) -> Any:
        value = self._args.get(key)
        if value is not None:
            return value
        env = os.environ.get(ENV_PREFIX + key.upper())
        if env is not None:
            return env
        if key in self._file:
            return self._file[key]
        return default

    def get_int(self, key: str, default: int) -> int:
        value = self.get(key, default)
        try:
            return int(value)
        except (TypeError, ValueError):
            raise CliError(f"setting {key!r} must be an integer, got {value!r}")

    def require(self, key: str, hint: str) -> Any:
        value = self.get(key)
        if value is None:
            raise CliError(f"missing required setting {key!r} ({hint})")
        return value


def _load_config_file(path: str) -> dict[str, Any]:
    if not os.path.exists(path):
        raise CliError(f"config file not found: {path}")
    if path.endswith(".toml"):
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    if path.endswith(".json"):
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    raise CliError(f"config file must end in .toml or .json: {path}")


def _require_file(path: str, what: str) -> str:
    if not os.path.exists(path):
        raise CliError(f"{what} not found: {path}")
    return path


def _load_scheme(settings: Settings) -> CategoryScheme:
    path = settings.require("scheme", "path to the category scheme CSV")
    return load_scheme(_require_file(path, "scheme file"))


def _corpus_paths(settings: Settings) -> tuple[str, str, str]:
    base = settings.get("corpus")
    papers = settings.get("papers") or (base and os.path.join(base, "papers.csv"))
    journals = settings.get("journals") or (base and os.path.join(base, "journals.csv"))
    edges = settings.get("edges") or (base and os.path.join(base, "edges.csv"))
    if not (papers and journals and edges):
        raise CliError(
            "missing corpus inputs: give --corpus DIR or all of "
            "--papers/--journals/--edges"
        )
    return (
        _require_file(papers, "papers file"),
        _require_file(journals, "journals file"),
        _require_file(edges, "edges file"),
    )


def _load_corpus(settings: Settings, scheme: CategoryScheme) -> Corpus:
    papers, journals, edges = _corpus_paths(settings)
    return ingest(papers, journals, edges, scheme)


def _out_dir(settings: Settings) -> str:
    out = settings.require("out", "output directory")
    os.makedirs(out, exist_ok=True)
    return out


def _maybe_threshold(raw: Any) -> float | None:
    if raw is None or raw == "none":
        return None
    return float(raw)


def _resolve_grid(
    settings: Settings,
) -> tuple[list[ClassificationConfig], list[float | None]]:
    spec = settings.get("grid", "default")
    if spec == "default":
        return list(default_grid()), list(DEFAULT_BASELINE_THRESHOLDS)
    data = _load_config_file(_require_file(str(spec), "grid file"))
    configs = [
        ClassificationConfig(**entry) for entry in data.get("configs", [])
    ]
    baselines = [_maybe_threshold(b) for b in data.get("baselines", [])]
    if not configs and not baselines:
        raise CliError(f"grid file defines no configs or baselines: {spec}")
    return configs, baselines


def _discover_classifications(settings: Settings) -> list[Classification]:
    cls_dir = settings.get("classifications")
    if cls_dir is None:
        out = settings.get("out")
        cls_dir = out and os.path.join(out, "classifications")
    if not cls_dir or not os.path.isdir(cls_dir):
        raise CliError("no classifications found (run the classify command first)")
    files = sorted(glob.glob(os.path.join(cls_dir, "*.csv")))
    if not files:
        raise CliError("no classifications found (run the classify command first)")
    return [reports.read_classification(path) for path in files]


def _load_gold(settings: Settings) -> Classification | None:
    path = settings.get("gold")
    if path is None:
        return None
    return reports.load_gold(_require_file(path, "gold file"))


# -- subcommands -------------------------------------------------------------


def cmd_ingest(settings: Settings) -> int:
    scheme = _load_scheme(settings)
    corpus = _load_corpus(settings, scheme)
    out = os.path.join(_out_dir(settings), "corpus")
    emit_corpus(corpus, out)
    print(
        f"ingested {corpus.n_papers} papers ({corpus.n_citable} citable), "
        f"{len(corpus.journals)} journals, {corpus.n_edges} resolved edges, "
        f"{sum(corpus.unresolved_ref_counts.values())} unresolved references"
    )
    print(f"wrote canonical corpus to {out}")
    return EXIT_OK


def cmd_synth(settings: Settings) -> int:
    fields = {f.name: f for f in dataclasses.fields(SynthParams)}
    kwargs: dict[str, Any] = {}
    for name in fields:
        value = settings.get(name)
        if value is not None:
            if name in ("refs_per_paper", "years"):
                if isinstance(value, str):
                    value = value.replace(",", " ").split()
                value = tuple(int(v) for v in value)
            else:
                ftype = str(fields[name].type)
                value = float(value) if "float" in ftype else int(value)
            kwargs[name] = value
    params = SynthParams(**kwargs)
    result = generate(params)
    out = _out_dir(settings)
    emit_synth(result, out)
    print(
        f"generated {result.corpus.n_papers} papers, "
        f"{len(result.corpus.journals)} journals, "
        f"{result.corpus.n_edges} edges (seed {params.seed})"
    )
    print(f"wrote scheme.csv, papers.csv, journals.csv, edges.csv, truth.csv to {out}")
    return EXIT_OK


def cmd_classify(settings: Settings) -> int:
    scheme = _load_scheme(settings)
    corpus = _load_corpus(settings, scheme)
    configs, baselines = _resolve_grid(settings)
    threads = settings.get_int("threads", 1)
    if threads == 0:
        threads = os.cpu_count() or 1
    out = os.path.join(_out_dir(settings), "classifications")
    os.makedirs(out, exist_ok=True)
    engine = CorpusClassifier(corpus, scheme)
    engine.prepare(configs)

    jobs: list[Any] = [("config", c) for c in configs] + [
        ("baseline", t) for t in baselines
    ]

    def run(job: tuple[str, Any]) -> tuple[str, int, int, int]:
        kind, arg = job
        if kind == "config":
            classification = engine.classify(arg)
        else:
            classification = engine.baseline(arg)
        path = os.path.join(out, f"{classification.label}.csv")
        reports.write_classification(classification, path)
        return (
            classification.label,
            classification.n_papers,
            classification.gate_failures,
            classification.unclassifiable,
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]
    for label, n_papers, gate_failures, unclassifiable in results:
        print(
            f"{label}: {n_papers} papers classified, "
            f"{gate_failures} gate failures, {unclassifiable} unclassifiable"
        )
    print(f"wrote {len(results)} classifications to {out}")
    return EXIT_OK


def _evaluate_tables(
    settings: Settings,
    scheme: CategoryScheme,
    corpus: Corpus,
    classifications: list[Classification],
    out: str,
) -> dict[str, Any]:
    """Compute and write the per-classification metric tables.

    Returns a JSON-friendly summary used by the report command.
    """
    from .classifier import asjc_baseline

    summary: dict[str, Any] = {}
    dist = active_reference_distribution(corpus, scheme)
    reports.write_active_reference_table(
        os.path.join(out, "active_references.csv"), dist
    )
    baseline = next(
        (c for c in classifications if c.label == "ASJC"),
        None,
    )
    if baseline is None:
        baseline = asjc_baseline(corpus, scheme)
    low_ref = metrics.low_reference_report(corpus, scheme, baseline)
    reports.write_low_reference_table(
        os.path.join(out, "low_reference.csv"), low_ref
    )

    stats_items = []
    cv_items = []
    profile_items = []
    area_items = []
    size_items = []
    retention_items = []
    impact_items = []
    for classification in classifications:
        stats = metrics.size_stats(classification)
        stats_items.append((classification, stats))
        cvs = {
            (scope, window): metrics.reference_cv(
                classification, corpus, scope, window
            )
            for scope in metrics.REF_CV_SCOPES
            for window in metrics.REF_CV_WINDOWS
        }
        cv_items.append((classification.label, cvs))
        profile = metrics.assignment_profile(classification)
        profile_items.append((classification.label, profile))
        area_items.append(
            (classification.label, metrics.area_distribution(classification, scheme))
        )
        size_items.append(
            (classification.label, metrics.category_sizes(classification))
        )
        retention_items.append(
            (classification.label, metrics.misc_retention(classification, corpus, scheme))
        )
        impact = metrics.normalized_impact(corpus, classification)
        impact_items.append((classification.label, impact))
        summary[classification.label] = {
            "n_papers": classification.n_papers,
            "gate_failures": classification.gate_failures,
            "unclassifiable": classification.unclassifiable,
            "size_stats": dataclasses.asdict(stats),
            "assignment_profile": dataclasses.asdict(profile),
            "normalized_impact_mean": impact.overall_mean,
        }

    reports.write_size_stats_table(os.path.join(out, "size_stats.csv"), stats_items)
    reports.write_reference_cv_table(os.path.join(out, "reference_cv.csv"), cv_items)
    reports.write_assignment_profile_table(
        os.path.join(out, "assignment_profile.csv"), profile_items
    )
    reports.write_area_distribution_table(
        os.path.join(out, "area_distribution.csv"), scheme, area_items
    )
    reports.write_category_size_table(
        os.path.join(out, "category_sizes.csv"), scheme, size_items
    )
    reports.write_misc_retention_table(
        os.path.join(out, "misc_retention.csv"), scheme, retention_items
    )
    reports.write_normalized_impact_table(
        os.path.join(out, "normalized_impact.csv"), impact_items
    )
    return summary


def cmd_evaluate(settings: Settings) -> int:
    scheme = _load_scheme(settings)
    corpus = _load_corpus(settings, scheme)
    classifications = _discover_classifications(settings)
    out = _out_dir(settings)
    _evaluate_tables(settings, scheme, corpus, classifications, out)
    print(
        f"evaluated {len(classifications)} classifications; tables written to {out}"
    )
    return EXIT_OK


def _compare_tables(
    scheme: CategoryScheme,
    classifications: list[Classification],
    gold: Classification | None,
    out: str,
) -> dict[str, Any]:
    labels = [c.label for c in classifications]
    n = len(classifications)
    matrix = [[0.0] * n for _ in range(n)]
    for i in range(n):
        matrix[i][i] = 100.0
        for j in range(i + 1, n):
            value = metrics.coincidence(classifications[i], classifications[j])
            matrix[i][j] = matrix[j][i] = value
    reports.write_matrix_table(
        os.path.join(out, "coincidence_matrix.csv"), labels, np.array(matrix)
    )
    corr = metrics.size_correlation(classifications, scheme)
    reports.write_matrix_table(
        os.path.join(out, "size_correlation.csv"), labels, np.atleast_2d(corr)
    )
    summary: dict[str, Any] = {"labels": labels}
    if gold is not None:
        items = [
            (c.label, metrics.compare_classifications(c, gold))
            for c in classifications
        ]
        reports.write_gold_comparison_table(
            os.path.join(out, "gold_comparison.csv"), items
        )
        summary["gold_comparison"] = {
            label: dataclasses.asdict(report) for label, report in items
        }
    return summary


def cmd_compare(settings: Settings) -> int:
    scheme = _load_scheme(settings)
    classifications = _discover_classifications(settings)
    gold = _load_gold(settings)
    out = _out_dir(settings)
    try:
        _compare_tables(scheme, classifications, gold, out)
    except ValueError as exc:
        if "empty paper intersection" in str(exc):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_EMPTY_INTERSECTION
        raise
    print(f"comparison tables written to {out}")
    return EXIT_OK


def cmd_report(settings: Settings) -> int:
    scheme = _load_scheme(settings)
    corpus = _load_corpus(settings, scheme)
    classifications = _discover_classifications(settings)
    gold = _load_gold(settings)
    out = _out_dir(settings)
    eval_summary = _evaluate_tables(settings, scheme, corpus, classifications, out)
    try:
        compare_summary = _compare_tables(scheme, classifications, gold, out)
    except ValueError as exc:
        if "empty paper intersection" in str(exc):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_EMPTY_INTERSECTION
        raise

    year_items = [
        (c.label, metrics.categories_per_year(c, corpus)) for c in classifications
    ]
    reports.write_categories_per_year_table(
        os.path.join(out, "categories_per_year.csv"), year_items
    )
    band_items = [
        (c.label, metrics.weight_band_profile(c)) for c in classifications
    ]
    reports.write_weight_band_table(
        os.path.join(out, "weight_bands.csv"), band_items
    )
    multi_ids = metrics.multidisciplinary_paper_ids(corpus, scheme)
    if multi_ids:
        subsets = [
            metrics.restrict_classification(c, multi_ids) for c in classifications
        ]
        subsets = [s for s in subsets if s.assignments]
        if subsets:
            area_items = [
                (s.label, metrics.area_distribution(s, scheme)) for s in subsets
            ]
            reports.write_area_distribution_table(
                os.path.join(out, "area_distribution_multidisciplinary.csv"),
                scheme,
                area_items,
            )

    payload = {
        "corpus": {
            "papers": corpus.n_papers,
            "citable": corpus.n_citable,
            "journals": len(corpus.journals),
            "edges": corpus.n_edges,
            "unresolved_references": sum(corpus.unresolved_ref_counts.values()),
        },
        "classifications": eval_summary,
        "comparison": compare_summary,
        "has_gold": gold is not None,
    }
    reports.write_report_json(os.path.join(out, "report.json"), payload)
    print(f"report written to {out}")
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="refclass",
        description=(
            "Fractional subject classification of papers from their "
            "reference generations, with evaluation against journal-based "
            "baselines and gold standards."
        ),
        epilog=(
            "Settings precedence: flags, then REFCLASS_* environment "
            "variables, then --config file values, then defaults."
        ),
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="info logging")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML or JSON settings file")
    common.add_argument("--out", help="output directory")
    common.add_argument(
        "--threads", type=int, help="worker threads, 0 = all cores (default 1)"
    )

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--scheme", help="category scheme CSV")
    data.add_argument("--corpus", help="directory with papers/journals/edges CSVs")
    data.add_argument("--papers", help="papers CSV (overrides --corpus)")
    data.add_argument("--journals", help="journals CSV (overrides --corpus)")
    data.add_argument("--edges", help="edges CSV (overrides --corpus)")

    cls_src = argparse.ArgumentParser(add_help=False)
    cls_src.add_argument(
        "--classifications",
        help="directory of classification CSVs (default: <out>/classifications)",
    )

    p = sub.add_parser(
        "ingest",
        parents=[common, data],
        help="validate inputs and write the canonical corpus",
    )
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser(
        "classify",
        parents=[common, data],
        help="run a configuration grid and write classification files",
    )
    p.add_argument(
        "--grid",
        help="'default' (30 configs + 4 baselines) or a TOML/JSON grid file",
    )
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser(
        "evaluate",
        parents=[common, data, cls_src],
        help="compute metric tables for written classifications",
    )
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser(
        "compare",
        parents=[common, data, cls_src],
        help="pairwise coincidence and correlation, optionally against gold",
    )
    p.add_argument("--gold", help="truth CSV or classification CSV")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser(
        "report",
        parents=[common, data, cls_src],
        help="full evaluation, comparison, figure data and report.json",
    )
    p.add_argument("--gold", help="truth CSV or classification CSV")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser(
        "synth", parents=[common], help="generate a synthetic corpus with gold truth"
    )
    p.add_argument("--seed", type=int)
    p.add_argument("--n-areas", dest="n_areas", type=int)
    p.add_argument("--cats-per-area", dest="cats_per_area", type=int)
    p.add_argument("--n-journals", dest="n_journals", type=int)
    p.add_argument("--n-papers", dest="n_papers", type=int)
    p.add_argument(
        "--refs-per-paper", dest="refs_per_paper", type=int, nargs=2,
        metavar=("LO", "HI"),
    )
    p.add_argument("--within-category-prob", dest="within_category_prob", type=float)
    p.add_argument("--misc-journal-frac", dest="misc_journal_frac", type=float)
    p.add_argument("--multi-journal-frac", dest="multi_journal_frac", type=float)
    p.add_argument(
        "--unclassified-journal-frac", dest="unclassified_journal_frac", type=float
    )
    p.add_argument("--low-ref-frac", dest="low_ref_frac", type=float)
    p.add_argument("--non-citable-frac", dest="non_citable_frac", type=float)
    p.add_argument("--years", type=int, nargs=2, metavar=("FIRST", "LAST"))
    p.add_argument("--citation-scale", dest="citation_scale", type=float)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        settings = Settings(args)
        return args.func(settings)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (SchemeError, CorpusError, ReportError, SynthesisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
