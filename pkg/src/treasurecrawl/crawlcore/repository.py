"""Versioned page repository."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from ..topic import TopicDecision
from .fetch import FetchResponse


class StoreError(OSError):
    pass


class IntegrityError(RuntimeError):
    pass


@dataclass
class CrawlRecord:
    url: str
    response: FetchResponse
    page_decision: TopicDecision
    link_scores: list[tuple[str, float]] = field(default_factory=list)
    version: int = 0
    html_path: Optional[str] = None
    stored_at: float = 0.0

    @property
    def html(self) -> bytes:
        return self.response.body


class Repository:
    """Keeps every stored version of every URL; the newest is current.

    With a ``root`` directory, page bodies are written to
    ``pages/<sha1(url)>.v<version>.html`` beneath it.
    """

    def __init__(self, root: str | Path | None = None) -> None:
        self.root = Path(root) if root is not None else None
        self._versions: dict[str, list[CrawlRecord]] = {}

    def __len__(self) -> int:
        return len(self._versions)

    def store(self, record: CrawlRecord) -> int:
        history = self._versions.setdefault(record.url, [])
        version = len(history) + 1
        html_path = None
        if self.root is not None and record.response.ok:
            digest = hashlib.sha1(record.url.encode("utf-8")).hexdigest()
            rel = f"pages/{digest}.v{version}.html"
            try:
                target = self.root / rel
                target.parent.mkdir(parents=True, exist_ok=True)
                target.write_bytes(record.response.body)
            except OSError as exc:
                if not history:
                    del self._versions[record.url]
                raise StoreError(f"cannot store {record.url}: {exc}") from exc
            html_path = rel
        stored = replace(record, version=version, html_path=html_path)
        history.append(stored)
        record.version = version
        record.html_path = html_path
        return version

    def current(self, url: str) -> Optional[CrawlRecord]:
        history = self._versions.get(url)
        return history[-1] if history else None

    def get(self, url: str, version: int) -> CrawlRecord:
        history = self._versions.get(url, [])
        if not 1 <= version <= len(history):
            raise KeyError(f"{url} has no version {version}")
        return history[version - 1]

    def versions(self, url: str) -> list[int]:
        return [r.version for r in self._versions.get(url, [])]

    def audit(self) -> int:
        """Check that every version chain is gapless and its files exist. Returns URLs checked."""
        for url, history in self._versions.items():
            if [r.version for r in history] != list(range(1, len(history) + 1)):
                raise IntegrityError(f"version chain of {url} is broken")
            if self.root is not None:
                for r in history:
                    if r.html_path and not (self.root / r.html_path).is_file():
                        raise IntegrityError(f"missing body for {url} v{r.version}")
        return len(self._versions)
