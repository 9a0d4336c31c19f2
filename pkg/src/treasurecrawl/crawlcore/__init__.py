from .config import ConfigError, CrawlConfig, load_config, parse_config, read_seeds
from .engine import Crawler, CrawlSummary, LogEntry, StepReport, crawl_step, read_log, resolve_inputs, run_crawl
from .fetch import CorpusFetcher, FetchResponse, HttpFetcher
from .frontier import Frontier, FrontierItem
from .repository import CrawlRecord, IntegrityError, Repository, StoreError

__all__ = [
    "ConfigError",
    "CorpusFetcher",
    "CrawlConfig",
    "CrawlRecord",
    "CrawlSummary",
    "Crawler",
    "FetchResponse",
    "Frontier",
    "FrontierItem",
    "HttpFetcher",
    "IntegrityError",
    "LogEntry",
    "Repository",
    "StepReport",
    "StoreError",
    "crawl_step",
    "load_config",
    "parse_config",
    "read_log",
    "read_seeds",
    "resolve_inputs",
    "run_crawl",
]
