"""Page fetchers. Failures are returned as data, never raised."""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Optional, Protocol
from urllib.parse import urlsplit
from urllib.robotparser import RobotFileParser

import requests

from ..pagemodel import NormalizationError, normalize_url

log = logging.getLogger(__name__)

OutcomeKind = Literal["ok", "http_error", "net_error"]


@dataclass(frozen=True)
class FetchResponse:
    url: str
    kind: OutcomeKind
    status: Optional[int] = None
    body: bytes = b""
    message: str = ""
    fetched_at: float = 0.0

    @property
    def ok(self) -> bool:
        return self.kind == "ok"


class Fetcher(Protocol):
    def fetch(self, url: str) -> FetchResponse: ...


class ManifestError(ValueError):
    pass


class CorpusFetcher:
    """Serves pages listed in a JSON-lines manifest of ``{"url", "path", "status"}``."""

    def __init__(self, manifest: str | Path) -> None:
        manifest = Path(manifest)
        if not manifest.is_file():
            raise ManifestError(f"no such file: {manifest}")
        self.root = manifest.parent
        self.entries: dict[str, tuple[Path, int]] = {}
        with manifest.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                    url = normalize_url(row["url"], row["url"])
                    status = int(row.get("status", 200))
                    path = self.root / row["path"]
                except (json.JSONDecodeError, KeyError, TypeError, ValueError, NormalizationError) as exc:
                    raise ManifestError(f"{manifest}:{lineno}: {exc}") from None
                self.entries[url] = (path, status)

    def fetch(self, url: str) -> FetchResponse:
        entry = self.entries.get(url)
        if entry is None:
            return FetchResponse(url, "http_error", 404, message="not in corpus")
        path, status = entry
        if status != 200:
            return FetchResponse(url, "http_error", status, message=f"HTTP {status}")
        try:
            body = path.read_bytes()
        except OSError as exc:
            return FetchResponse(url, "net_error", message=f"unreadable corpus file: {exc}")
        return FetchResponse(url, "ok", 200, body=body)


class HttpFetcher:
    """Live HTTP GET with robots.txt, one retry on network errors and a per-host delay."""

    def __init__(
        self,
        timeout: float = 10.0,
        host_delay: float = 1.0,
        user_agent: str = "treasurecrawl/0.1",
        session: requests.Session | None = None,
    ) -> None:
        self.timeout = timeout
        self.host_delay = host_delay
        self.user_agent = user_agent
        self.session = session or requests.Session()
        self.session.headers["User-Agent"] = user_agent
        self._robots: dict[str, Optional[RobotFileParser]] = {}
        self._last_hit: dict[str, float] = {}
        self._lock = threading.Lock()

    def _host_key(self, url: str) -> str:
        parts = urlsplit(url)
        return f"{parts.scheme}://{parts.netloc}"

    def _robots_for(self, host: str) -> Optional[RobotFileParser]:
        with self._lock:
            if host in self._robots:
                return self._robots[host]
        parser: Optional[RobotFileParser] = RobotFileParser()
        try:
            resp = self.session.get(host + "/robots.txt", timeout=self.timeout)
            if resp.status_code in (401, 403):
                parser.disallow_all = True
            elif resp.status_code >= 400:
                parser = None
            else:
                parser.parse(resp.text.splitlines())
        except requests.RequestException:
            parser = None
        with self._lock:
            self._robots[host] = parser
        return parser

    def _wait_turn(self, host: str) -> None:
        with self._lock:
            now = time.monotonic()
            ready = self._last_hit.get(host, -1e9) + self.host_delay
            self._last_hit[host] = max(now, ready)
        if ready > now:
            time.sleep(ready - now)

    def fetch(self, url: str) -> FetchResponse:
        host = self._host_key(url)
        robots = self._robots_for(host)
        if robots is not None and not robots.can_fetch(self.user_agent, url):
            return FetchResponse(url, "net_error", message="robots", fetched_at=time.time())
        last_error = ""
        for attempt in range(2):
            self._wait_turn(host)
            try:
                resp = self.session.get(url, timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = f"{type(exc).__name__}: {exc}"
                log.debug("fetch %s failed (attempt %d): %s", url, attempt + 1, last_error)
                continue
            if resp.status_code != 200:
                return FetchResponse(url, "http_error", resp.status_code, message=resp.reason or "", fetched_at=time.time())
            return FetchResponse(url, "ok", 200, body=resp.content, fetched_at=time.time())
        return FetchResponse(url, "net_error", message=last_error, fetched_at=time.time())
