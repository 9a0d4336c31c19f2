"""Crawl configuration: flat ``key = value`` files with the published defaults."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..pagemodel import NormalizationError, normalize_url

STRATEGIES = ("treasure", "bfs")
FETCH_MODES = ("live", "corpus")
PATH_KEYS = ("taxonomy", "profile", "tgraph", "corpus_manifest", "seeds", "output_dir", "labels")


class ConfigError(ValueError):
    pass


@dataclass
class CrawlConfig:
    tgraph_depth: int = 3
    osm_threshold: float = 0.05
    anchor_impact: float = 1.40
    max_dnumber_length: int = 3
    unrelated_priority: float = 0.01
    aging_factor: float = 0.05
    aging_interval: int = 100
    page_budget: int = 1000
    strategy: str = "treasure"
    fetch_mode: str = "corpus"
    context_window: int = 50
    watchdog_enabled: bool = False
    watchdog_interval: int = 500
    promote_threshold: float = 0.5
    watchdog_max_nodes: int = 20
    checker_interval: int = 100
    # when false, links found on off-topic pages are dropped instead of
    # being queued at unrelated_priority (tunneling ablation)
    follow_offtopic_links: bool = True
    max_parents_per_node: int = 5
    fetch_timeout: float = 10.0
    host_delay: float = 1.0
    workers: int = 1
    block_size: int = 1000

    taxonomy: Optional[Path] = None
    profile: Optional[Path] = None
    tgraph: Optional[Path] = None
    corpus_manifest: Optional[Path] = None
    seeds: Optional[Path] = None
    output_dir: Optional[Path] = None
    labels: Optional[Path] = None
    seed_urls: list[str] = field(default_factory=list)

    def validate(self) -> "CrawlConfig":
        positive = (
            "tgraph_depth", "osm_threshold", "anchor_impact", "max_dnumber_length", "unrelated_priority",
            "aging_factor", "aging_interval", "page_budget", "context_window", "watchdog_interval",
            "promote_threshold", "checker_interval", "max_parents_per_node", "fetch_timeout", "workers",
            "block_size",
        )
        for name in positive:
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.watchdog_max_nodes < 0 or self.host_delay < 0:
            raise ConfigError("watchdog_max_nodes and host_delay must be >= 0")
        if self.osm_threshold > 1 or self.unrelated_priority >= 1 or self.promote_threshold > 1:
            raise ConfigError("osm_threshold and promote_threshold must be <= 1, unrelated_priority < 1")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy must be one of {STRATEGIES}")
        if self.fetch_mode not in FETCH_MODES:
            raise ConfigError(f"fetch_mode must be one of {FETCH_MODES}")
        return self

    def with_overrides(self, **changes) -> "CrawlConfig":
        return dataclasses.replace(self, **changes).validate()


def _convert(name: str, raw: str, kind: type):
    if kind is bool:
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {raw!r}")
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{name}: expected {kind.__name__}, got {raw!r}") from None


_SCALAR_TYPES = {
    f.name: f.type
    for f in dataclasses.fields(CrawlConfig)
    if f.name not in PATH_KEYS and f.name != "seed_urls"
}
_TYPE_NAMES = {"int": int, "float": float, "str": str, "bool": bool}


def parse_config(text: str, base_dir: Path = Path("."), source: str = "<string>") -> CrawlConfig:
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        if key in PATH_KEYS:
            values[key] = (base_dir / value) if value else None
        elif key in _SCALAR_TYPES:
            values[key] = _convert(key, value, _TYPE_NAMES[_SCALAR_TYPES[key]])
        else:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
    return CrawlConfig(**values).validate()


def load_config(path: str | Path) -> CrawlConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, path.parent, str(path))


def format_config(config: CrawlConfig, relative_to: Path | None = None) -> str:
    lines = []
    for f in dataclasses.fields(CrawlConfig):
        if f.name == "seed_urls":
            continue
        value = getattr(config, f.name)
        if value is None:
            continue
        if isinstance(value, Path):
            value = value.relative_to(relative_to) if relative_to and value.is_relative_to(relative_to) else value
            value = value.as_posix()
        elif isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


def read_seeds(path: str | Path) -> list[str]:
    """One URL per line; ``#`` starts a comment."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read seeds {path}: {exc}") from None
    seeds = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            seeds.append(normalize_url(line, line))
        except NormalizationError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from None
    return seeds
