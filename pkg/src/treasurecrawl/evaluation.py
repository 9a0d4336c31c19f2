"""Harvest ratio, recall and precision over crawl logs, and their CSV forms."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Protocol, Sequence

from .pagemodel import NormalizationError, normalize_url

UNDEFINED = "undefined"
SERIES_HEADER = ("block_index", "pages", "on_topic", "harvest_ratio", "cumulative_on_topic")


class EvaluationError(ValueError):
    pass


class _Logged(Protocol):
    url: str
    on_topic: bool


LabelSet = dict  # normalized URL -> bool


def load_labels(path: str | Path) -> dict[str, bool]:
    """Labels TSV: ``url<TAB>0|1`` per line."""
    labels: dict[str, bool] = {}
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise EvaluationError(f"cannot read labels {path}: {exc}") from None
    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip() or raw.startswith("#"):
            continue
        cols = raw.split("\t")
        if len(cols) != 2 or cols[1].strip() not in ("0", "1"):
            raise EvaluationError(f"{path}:{lineno}: expected 'url<TAB>0|1'")
        try:
            url = normalize_url(cols[0].strip(), cols[0].strip())
        except NormalizationError as exc:
            raise EvaluationError(f"{path}:{lineno}: {exc}") from None
        labels[url] = cols[1].strip() == "1"
    return labels


@dataclass(frozen=True)
class Block:
    index: int
    pages: int
    on_topic: int
    harvest_ratio: float


@dataclass(frozen=True)
class MetricsSeries:
    block_size: int
    blocks: tuple[Block, ...]
    cumulative: tuple[int, ...]

    @property
    def total_pages(self) -> int:
        return sum(b.pages for b in self.blocks)

    @property
    def total_on_topic(self) -> int:
        return self.cumulative[-1] if self.cumulative else 0

    @property
    def cumulative_harvest_ratio(self) -> float:
        return self.total_on_topic / self.total_pages if self.total_pages else 0.0


def _is_on_topic(entry: _Logged, labels: Optional[Mapping[str, bool]]) -> bool:
    if labels is None:
        return bool(entry.on_topic)
    return bool(labels.get(entry.url, False))


def harvest_series(log: Sequence[_Logged], labels: Optional[Mapping[str, bool]] = None, block_size: int = 1000) -> MetricsSeries:
    """Per-block on-topic counts and harvest ratios.

    With ``labels`` a page counts as on-topic by its ground-truth label,
    otherwise by the crawler's own page decision. The last block may be short.
    """
    if block_size < 1:
        raise EvaluationError("block_size must be >= 1")
    if not log:
        raise EvaluationError("empty crawl log")
    blocks = []
    cumulative = []
    running = 0
    for start in range(0, len(log), block_size):
        chunk = log[start : start + block_size]
        hits = sum(_is_on_topic(e, labels) for e in chunk)
        running += hits
        blocks.append(Block(start // block_size + 1, len(chunk), hits, hits / len(chunk)))
        cumulative.append(running)
    return MetricsSeries(block_size, tuple(blocks), tuple(cumulative))


def recall_precision(log: Iterable[_Logged], labels: Mapping[str, bool]) -> tuple[Optional[float], Optional[float]]:
    """(recall, precision) of the crawler's page decisions on labeled crawled pages.

    A metric whose denominator is zero is returned as ``None``.
    """
    if not labels:
        raise EvaluationError("label set is empty")
    tp = fp = fn = 0
    overlap = 0
    for entry in log:
        if entry.url not in labels:
            continue
        overlap += 1
        truth = labels[entry.url]
        if entry.on_topic and truth:
            tp += 1
        elif entry.on_topic:
            fp += 1
        elif truth:
            fn += 1
    if overlap == 0:
        raise EvaluationError("no labeled overlap")
    recall = tp / (tp + fn) if tp + fn else None
    precision = tp / (tp + fp) if tp + fp else None
    return recall, precision


def _fmt(value) -> str:
    if value is None:
        return UNDEFINED
    return repr(value) if isinstance(value, float) else str(value)


def series_rows(series: MetricsSeries) -> list[list[str]]:
    return [
        [str(b.index), str(b.pages), str(b.on_topic), _fmt(b.harvest_ratio), str(c)]
        for b, c in zip(series.blocks, series.cumulative)
    ]


def series_csv(series: MetricsSeries) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SERIES_HEADER)
    writer.writerows(series_rows(series))
    return buf.getvalue()


def parse_series_csv(text: str) -> MetricsSeries:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != SERIES_HEADER:
        raise EvaluationError("not a metrics CSV")
    blocks = []
    cumulative = []
    for row in rows[1:]:
        blocks.append(Block(int(row[0]), int(row[1]), int(row[2]), float(row[3])))
        cumulative.append(int(row[4]))
    size = blocks[0].pages if blocks else 1
    return MetricsSeries(size, tuple(blocks), tuple(cumulative))


def comparison_csv(
    results: Mapping[str, MetricsSeries],
    recalls: Optional[Mapping[str, Optional[float]]] = None,
) -> str:
    """Side-by-side per-block table, one column group per strategy.

    ``scaled_cumulative_<s>`` multiplies the cumulative count by the
    strategy's measured recall (``undefined`` without one).
    """
    recalls = recalls or {}
    names = list(results)
    header = ["block_index"]
    for name in names:
        header += [f"{col}_{name}" for col in SERIES_HEADER[1:]] + [f"scaled_cumulative_{name}"]
    n_blocks = max(len(s.blocks) for s in results.values())
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for i in range(n_blocks):
        row = [str(i + 1)]
        for name in names:
            series = results[name]
            if i >= len(series.blocks):
                row += [""] * 5
                continue
            b = series.blocks[i]
            recall = recalls.get(name)
            scaled = None if recall is None else series.cumulative[i] * recall
            row += [str(b.pages), str(b.on_topic), _fmt(b.harvest_ratio), str(series.cumulative[i]), _fmt(scaled)]
        writer.writerow(row)
    return buf.getvalue()


def parse_comparison_csv(text: str) -> dict[str, list[dict[str, Optional[float]]]]:
    """Inverse of :func:`comparison_csv`: per strategy, one dict per block."""
    rows = list(csv.DictReader(io.StringIO(text)))
    names = []
    for field in csv.reader(io.StringIO(text)).__next__()[1:]:
        if field.startswith("pages_"):
            names.append(field[len("pages_") :])
    out: dict[str, list[dict]] = {name: [] for name in names}
    for row in rows:
        for name in names:
            if row[f"pages_{name}"] == "":
                continue
            values = {}
            for col in SERIES_HEADER[1:] + ("scaled_cumulative",):
                raw = row[f"{col}_{name}"]
                values[col] = None if raw == UNDEFINED else (float(raw) if col in ("harvest_ratio", "scaled_cumulative") else int(raw))
            out[name].append(values)
    return out
