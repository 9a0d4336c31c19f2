"""The crawl loop.

One step: dequeue the best URL, fetch it, pass the response through the
response queue, decide whether the page is on-topic, score its unvisited
links, enqueue them and store the record.
"""

from __future__ import annotations

import json
import logging
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Optional, Sequence

from ..pagemodel import PageDocument, extract_context, parse_document
from ..taxonomy import Taxonomy, TaxonomyError, TopicProfile, default_profile, default_taxonomy, load_profile, load_taxonomy
from ..tgraph import OsmParams, TGraph, TGraphError, WatchdogParams, load_tgraph, score_links, watchdog_update
from ..topic import DetectorParams, TopicDecision, classify_link, classify_page
from .config import ConfigError, CrawlConfig, read_seeds
from .fetch import CorpusFetcher, Fetcher, FetchResponse, HttpFetcher, ManifestError
from .frontier import Frontier, FrontierItem
from .repository import CrawlRecord, Repository, StoreError

log = logging.getLogger(__name__)

LOG_NAME = "crawl_log.jsonl"


@dataclass
class LogEntry:
    """One line of the crawl log."""

    step: int
    url: str
    priority: float
    version: int
    outcome: str
    status: Optional[int]
    message: str
    on_topic: bool
    galaxy: Optional[dict]
    matched_code: Optional[str]
    link_scores: list[tuple[str, float]]
    html_path: Optional[str]
    fetched_at: float
    stored_at: float

    def to_json(self) -> str:
        payload = {
            "step": self.step,
            "url": self.url,
            "priority": self.priority,
            "version": self.version,
            "outcome": {"kind": self.outcome, "status": self.status, "message": self.message},
            "on_topic": self.on_topic,
            "galaxy": self.galaxy,
            "matched_code": self.matched_code,
            "link_scores": [[u, p] for u, p in self.link_scores],
            "html_path": self.html_path,
            "fetched_at": self.fetched_at,
            "stored_at": self.stored_at,
        }
        return json.dumps(payload, ensure_ascii=False)

    @classmethod
    def from_json(cls, line: str) -> "LogEntry":
        d = json.loads(line)
        outcome = d["outcome"]
        return cls(
            step=d["step"],
            url=d["url"],
            priority=d["priority"],
            version=d["version"],
            outcome=outcome["kind"],
            status=outcome.get("status"),
            message=outcome.get("message", ""),
            on_topic=bool(d["on_topic"]),
            galaxy=d.get("galaxy"),
            matched_code=d.get("matched_code"),
            link_scores=[(u, p) for u, p in d.get("link_scores", [])],
            html_path=d.get("html_path"),
            fetched_at=d.get("fetched_at", 0.0),
            stored_at=d.get("stored_at", 0.0),
        )


def read_log(path: str | Path) -> list[LogEntry]:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        return [LogEntry.from_json(line) for line in fh if line.strip()]


@dataclass
class StepReport:
    item: FrontierItem
    response: FetchResponse
    record: CrawlRecord
    enqueued: list[tuple[str, float]] = field(default_factory=list)

    @property
    def outcome(self) -> str:
        return self.response.kind

    @property
    def on_topic(self) -> bool:
        return self.record.page_decision.on_topic


@dataclass
class CrawlSummary:
    pages_crawled: int
    on_topic: int
    errors: int
    frontier_exhausted: bool
    log_path: Optional[Path]
    watchdog_added: int = 0


class Crawler:
    """Holds the crawl state; :meth:`step` runs one fetch-analyze-enqueue cycle."""

    def __init__(
        self,
        config: CrawlConfig,
        taxonomy: Taxonomy,
        profile: TopicProfile,
        fetcher: Fetcher,
        graph: Optional[TGraph] = None,
        repository: Optional[Repository] = None,
        log_file: Optional[IO[str]] = None,
    ) -> None:
        if config.strategy == "treasure" and graph is None:
            raise ConfigError("treasure strategy needs a T-Graph")
        self.config = config
        self.taxonomy = taxonomy
        self.profile = profile
        self.fetcher = fetcher
        self.graph = graph
        self.repository = repository if repository is not None else Repository()
        self.log_file = log_file
        self.detector = DetectorParams(config.anchor_impact, config.max_dnumber_length)
        self.osm = OsmParams(config.osm_threshold, config.unrelated_priority)
        self.watchdog = WatchdogParams(
            config.watchdog_enabled, config.watchdog_interval, config.promote_threshold, config.watchdog_max_nodes
        )
        self.frontier = Frontier(config.aging_factor, config.aging_interval)
        self.responses: deque[tuple[FrontierItem, FetchResponse]] = deque()
        self.steps = 0
        self.on_topic = 0
        self.errors = 0
        self.watchdog_added = 0
        self._experience: list[PageDocument] = []
        self.deterministic = config.fetch_mode == "corpus"

    def seed(self, urls: Iterable[str]) -> None:
        for url in urls:
            self.frontier.enqueue(url, 1.0)

    @property
    def budget_left(self) -> int:
        return self.config.page_budget - self.steps

    def step(self) -> Optional[StepReport]:
        """One crawl cycle, or ``None`` when the frontier is empty or the budget spent."""
        if self.budget_left <= 0:
            return None
        item = self.frontier.dequeue()
        if item is None:
            return None
        self.responses.append((item, self._fetch(item.url)))
        return self._process(*self.responses.popleft())

    def _fetch(self, url: str) -> FetchResponse:
        response = self.fetcher.fetch(url)
        if self.deterministic and response.fetched_at:
            response = FetchResponse(response.url, response.kind, response.status, response.body, response.message, 0.0)
        return response

    def _link_priorities(self, doc: PageDocument, decision: TopicDecision) -> list[tuple[str, float]]:
        cfg = self.config
        if cfg.strategy == "bfs":
            return [(link.target, 1.0) for link in doc.links]
        if not decision.on_topic:
            if not cfg.follow_offtopic_links:
                return []
            return [(link.target, cfg.unrelated_priority) for link in doc.links]
        contexts = [extract_context(doc, link) for link in doc.links]
        relevant = [
            i for i, ctx in enumerate(contexts) if classify_link(ctx, self.taxonomy, self.profile, self.detector).on_topic
        ]
        priorities = [cfg.unrelated_priority] * len(contexts)
        for i, p in zip(relevant, score_links([contexts[i] for i in relevant], doc, self.graph, self.osm)):
            priorities[i] = p
        return [(link.target, p) for link, p in zip(doc.links, priorities)]

    def _process(self, item: FrontierItem, response: FetchResponse) -> StepReport:
        self.steps += 1
        enqueued: list[tuple[str, float]] = []
        scores: list[tuple[str, float]] = []
        doc: Optional[PageDocument] = None
        if response.ok:
            doc = parse_document(response.body, item.url, self.config.context_window)
            decision = classify_page(doc, self.taxonomy, self.profile, self.detector)
            best: dict[str, float] = {}
            for target, priority in self._link_priorities(doc, decision):
                if target == doc.url:
                    continue
                if target not in best:
                    scores.append((target, priority))
                    best[target] = priority
                elif priority > best[target]:
                    best[target] = priority
            scores = [(t, best[t]) for t, _ in scores]
            for target, priority in scores:
                if self.frontier.enqueue(target, priority):
                    enqueued.append((target, priority))
        else:
            decision = TopicDecision(False)
            self.errors += 1
            log.info("fetch failed for %s: %s %s", item.url, response.status, response.message)
        if decision.on_topic:
            self.on_topic += 1
        record = CrawlRecord(
            url=item.url,
            response=response,
            page_decision=decision,
            link_scores=scores,
            stored_at=0.0 if self.deterministic else time.time(),
        )
        self.repository.store(record)
        self._write_log(item, record)
        if doc is not None and decision.on_topic and self.watchdog.enabled:
            self._experience.append(doc)
        self._periodic()
        return StepReport(item, response, record, enqueued)

    def _periodic(self) -> None:
        if self.steps % self.config.checker_interval == 0:
            self.repository.audit()
        if self.watchdog.enabled and self.steps % self.watchdog.interval == 0 and self.graph is not None:
            before = len(self.graph.nodes)
            self.graph = watchdog_update(self.graph, self._experience, self.watchdog, self.watchdog_added)
            self.watchdog_added += len(self.graph.nodes) - before
            self._experience.clear()

    def _write_log(self, item: FrontierItem, record: CrawlRecord) -> None:
        if self.log_file is None:
            return
        g = record.page_decision.galaxy
        entry = LogEntry(
            step=self.steps,
            url=record.url,
            priority=item.priority,
            version=record.version,
            outcome=record.response.kind,
            status=record.response.status,
            message=record.response.message,
            on_topic=record.page_decision.on_topic,
            galaxy=None if g is None else {"prefix": g.prefix, "score": g.score, "support": g.support, "anchor_support": g.anchor_support},
            matched_code=record.page_decision.matched_code,
            link_scores=record.link_scores,
            html_path=record.html_path,
            fetched_at=record.response.fetched_at,
            stored_at=record.stored_at,
        )
        self.log_file.write(entry.to_json() + "\n")

    def run(self) -> CrawlSummary:
        workers = self.config.workers if self.config.fetch_mode == "live" else 1
        if workers > 1:
            self._run_parallel(workers)
        else:
            while self.step() is not None:
                pass
        if self.log_file is not None:
            self.log_file.flush()
        return CrawlSummary(
            pages_crawled=self.steps,
            on_topic=self.on_topic,
            errors=self.errors,
            frontier_exhausted=len(self.frontier) == 0,
            log_path=Path(self.log_file.name) if self.log_file is not None and hasattr(self.log_file, "name") else None,
            watchdog_added=self.watchdog_added,
        )

    def _run_parallel(self, workers: int) -> None:
        # fetches overlap; frontier and repository are only touched here
        with ThreadPoolExecutor(max_workers=workers) as pool:
            while self.budget_left > 0:
                batch: list[FrontierItem] = []
                while len(batch) < min(workers, self.budget_left):
                    item = self.frontier.dequeue()
                    if item is None:
                        break
                    batch.append(item)
                if not batch:
                    return
                for item, response in zip(batch, pool.map(lambda it: self._fetch(it.url), batch)):
                    self.responses.append((item, response))
                while self.responses:
                    self._process(*self.responses.popleft())


def crawl_step(crawler: Crawler) -> Optional[StepReport]:
    return crawler.step()


def resolve_inputs(config: CrawlConfig) -> tuple[Taxonomy, TopicProfile, Optional[TGraph], Fetcher, list[str]]:
    """Load everything a crawl needs, failing before any fetch."""
    try:
        taxonomy = load_taxonomy(config.taxonomy) if config.taxonomy else default_taxonomy()
        profile = (
            load_profile(config.profile, config.max_dnumber_length)
            if config.profile
            else default_profile(config.max_dnumber_length)
        )
    except TaxonomyError as exc:
        raise ConfigError(str(exc)) from None
    graph = None
    if config.strategy == "treasure":
        if config.tgraph is None:
            raise ConfigError("treasure strategy requires 'tgraph'")
        try:
            graph = load_tgraph(config.tgraph)
        except TGraphError as exc:
            raise ConfigError(str(exc)) from None
    if config.fetch_mode == "corpus":
        if config.corpus_manifest is None:
            raise ConfigError("corpus mode requires 'corpus_manifest'")
        try:
            fetcher: Fetcher = CorpusFetcher(config.corpus_manifest)
        except ManifestError as exc:
            raise ConfigError(str(exc)) from None
    else:
        fetcher = HttpFetcher(timeout=config.fetch_timeout, host_delay=config.host_delay)
    seeds = list(config.seed_urls)
    if config.seeds is not None:
        seeds += read_seeds(config.seeds)
    if not seeds:
        raise ConfigError("no seed URLs")
    return taxonomy, profile, graph, fetcher, seeds


def run_crawl(config: CrawlConfig, output_dir: str | Path | None = None, store_pages: bool = True) -> CrawlSummary:
    """Run a full crawl and write ``crawl_log.jsonl`` (and page bodies) under the output dir."""
    taxonomy, profile, graph, fetcher, seeds = resolve_inputs(config)
    out = Path(output_dir) if output_dir is not None else config.output_dir
    if out is None:
        raise ConfigError("no output directory")
    out.mkdir(parents=True, exist_ok=True)
    repo = Repository(out if store_pages else None)
    log_path = out / LOG_NAME
    with log_path.open("w", encoding="utf-8") as fh:
        crawler = Crawler(config, taxonomy, profile, fetcher, graph, repo, fh)
        crawler.seed(seeds)
        try:
            summary = crawler.run()
        except StoreError:
            fh.flush()
            raise
    summary.log_path = log_path
    return summary
