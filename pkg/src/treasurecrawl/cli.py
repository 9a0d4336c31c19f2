"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .compare import StrategyRunError, compare_strategies
from .corpus import CorpusError, CorpusSpec, write_corpus
from .crawlcore import ConfigError, load_config, read_log, run_crawl
from .evaluation import EvaluationError, harvest_series, load_labels, recall_precision, series_csv
from .taxonomy import TaxonomyError
from .tgraph import StaticParentProvider, TGraphError, build_tgraph, save_tgraph

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _positive(raw: str) -> int:
    value = int(raw)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _existing(path: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise UsageError(f"no such file: {p}")
    return p


def cmd_crawl(args) -> int:
    config = load_config(args.config)
    if args.budget:
        config = config.with_overrides(page_budget=args.budget)
    summary = run_crawl(config, args.out)
    print(
        f"crawled {summary.pages_crawled} pages, {summary.on_topic} on-topic, {summary.errors} errors; "
        f"log: {summary.log_path}"
    )
    return EXIT_OK


def cmd_build_tgraph(args) -> int:
    targets_file = _existing(args.targets)
    targets = [
        line.split("#", 1)[0].strip()
        for line in targets_file.read_text(encoding="utf-8").splitlines()
        if line.split("#", 1)[0].strip()
    ]
    provider = StaticParentProvider.from_tsv(_existing(args.parents))
    graph = build_tgraph(targets, provider, depth=args.depth, max_parents_per_node=args.max_parents)
    save_tgraph(graph, args.out)
    levels = ", ".join(f"L{k}={v}" for k, v in sorted(graph.level_counts().items()))
    print(f"T-Graph: {len(graph.nodes)} nodes from {len(graph.url_occurrences())} URLs ({levels}) -> {args.out}")
    return EXIT_OK


def cmd_gen_corpus(args) -> int:
    spec = CorpusSpec.from_json(_existing(args.spec)).validate()
    corpus = write_corpus(spec, args.out)
    on = sum(p.label for p in corpus.pages)
    print(f"wrote {len(corpus.pages)} pages ({on} on-topic) to {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    log = read_log(_existing(args.log))
    labels = load_labels(_existing(args.labels)) if args.labels else None
    series = harvest_series(log, labels, args.block)
    Path(args.out).write_text(series_csv(series), encoding="utf-8")
    print(f"{series.total_pages} pages, {series.total_on_topic} on-topic, harvest {series.cumulative_harvest_ratio:.3f}")
    if labels is not None:
        recall, precision = recall_precision(log, labels)
        fmt = lambda v: "undefined" if v is None else f"{v:.3f}"
        print(f"recall {fmt(recall)}, precision {fmt(precision)}")
    return EXIT_OK


def cmd_compare(args) -> int:
    config = load_config(args.config)
    if args.budget:
        config = config.with_overrides(page_budget=args.budget)
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    try:
        csv_text, results = compare_strategies(config, strategies, args.workdir, args.block, args.labels)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    Path(args.out).write_text(csv_text, encoding="utf-8")
    for name, res in results.items():
        print(f"{name}: {res.series.total_on_topic} on-topic of {res.series.total_pages} pages")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="treasurecrawl", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("crawl", help="run a crawl from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="output directory (default: output_dir from the config)")
    p.add_argument("--budget", type=_positive)
    p.set_defaults(func=cmd_crawl)

    p = sub.add_parser("build-tgraph", help="build a T-Graph from targets and a parent map")
    p.add_argument("--targets", required=True)
    p.add_argument("--parents", required=True)
    p.add_argument("--depth", type=_positive, default=3)
    p.add_argument("--max-parents", type=_positive, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_tgraph)

    p = sub.add_parser("gen-corpus", help="generate a synthetic corpus")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_corpus)

    p = sub.add_parser("eval", help="per-block harvest metrics for a crawl log")
    p.add_argument("--log", required=True)
    p.add_argument("--labels")
    p.add_argument("--block", type=_positive, default=1000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="run several strategies and compare them")
    p.add_argument("--config", required=True)
    p.add_argument("--strategies", default="treasure,bfs")
    p.add_argument("--block", type=_positive)
    p.add_argument("--labels")
    p.add_argument("--budget", type=_positive)
    p.add_argument("--workdir", help="where per-strategy runs go (default: output_dir from the config)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"treasurecrawl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, CorpusError, TaxonomyError) as exc:
        print(f"treasurecrawl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (StrategyRunError, TGraphError, EvaluationError, OSError) as exc:
        print(f"treasurecrawl: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # anything else is still a runtime failure, not a traceback
        logging.getLogger(__name__).debug("unexpected error", exc_info=True)
        print(f"treasurecrawl: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
