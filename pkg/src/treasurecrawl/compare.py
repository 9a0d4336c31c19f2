"""Run the same crawl under several strategies and tabulate the results."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .crawlcore import CrawlConfig, read_log, run_crawl
from .crawlcore.config import STRATEGIES
from .evaluation import MetricsSeries, comparison_csv, harvest_series, load_labels, recall_precision


class StrategyRunError(RuntimeError):
    def __init__(self, strategy: str, cause: BaseException) -> None:
        super().__init__(f"strategy {strategy!r} failed: {cause}")
        self.strategy = strategy
        self.cause = cause


@dataclass
class StrategyResult:
    strategy: str
    series: MetricsSeries
    recall: Optional[float]
    precision: Optional[float]
    log_path: Path


def compare_strategies(
    config: CrawlConfig,
    strategies: Sequence[str],
    out_dir: str | Path | None = None,
    block_size: Optional[int] = None,
    labels_path: str | Path | None = None,
) -> tuple[str, dict[str, StrategyResult]]:
    """Crawl once per strategy (sequentially) and return the comparison CSV.

    Each run writes under ``<out_dir>/<strategy>``. Blocks count pages by
    ground-truth label when a label file is available, otherwise by the
    crawler's own decisions. Recall comes from the labels, if any.
    """
    unknown = [s for s in strategies if s not in STRATEGIES]
    if unknown or not strategies:
        raise ValueError(f"strategies must be a non-empty subset of {STRATEGIES}, got {list(strategies)}")
    base = Path(out_dir) if out_dir is not None else config.output_dir
    if base is None:
        raise ValueError("no output directory")
    labels_path = labels_path or config.labels
    labels = load_labels(labels_path) if labels_path else None
    block = block_size or config.block_size
    results: dict[str, StrategyResult] = {}
    for name in strategies:
        try:
            summary = run_crawl(config.with_overrides(strategy=name), base / name, store_pages=False)
            log = read_log(summary.log_path)
            series = harvest_series(log, labels, block)
            recall = precision = None
            if labels:
                recall, precision = recall_precision(log, labels)
        except Exception as exc:
            raise StrategyRunError(name, exc) from exc
        results[name] = StrategyResult(name, series, recall, precision, summary.log_path)
    csv_text = comparison_csv({n: r.series for n, r in results.items()}, {n: r.recall for n, r in results.items()})
    return csv_text, results
