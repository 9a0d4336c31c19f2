"""HTML document model and break-point link contexts.

The parser flattens visible text into one token stream and cuts it into
segments at every block-level tag. A link inside ``<p>`` (or a ``<div>``
holding text directly) takes its enclosing segment as context; a link inside
``<li>`` takes every item of its list; anything else gets a fixed token
window around the anchor.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from html.parser import HTMLParser
from urllib.parse import urljoin, urlsplit, urlunsplit

from .text import tokenize

__all__ = [
    "Container",
    "ContextToken",
    "Link",
    "LinkContext",
    "NormalizationError",
    "PageDocument",
    "extract_context",
    "normalize_url",
    "parse_document",
    "tokenize",
]

DEFAULT_CONTEXT_WINDOW = 50


class NormalizationError(ValueError):
    """Raised for URLs that cannot be resolved to an absolute http(s) URL."""


class Container(str, enum.Enum):
    PARAGRAPH = "paragraph"
    LIST_ITEM = "list_item"
    OTHER = "other"


_DEFAULT_PORTS = {"http": 80, "https": 443}


def _remove_dot_segments(path: str) -> str:
    # RFC 3986 section 5.2.4
    out: list[str] = []
    while path:
        if path.startswith("../"):
            path = path[3:]
        elif path.startswith("./"):
            path = path[2:]
        elif path.startswith("/./"):
            path = "/" + path[3:]
        elif path == "/.":
            path = "/"
        elif path.startswith("/../"):
            path = "/" + path[4:]
            if out:
                out.pop()
        elif path == "/..":
            path = "/"
            if out:
                out.pop()
        elif path in (".", ".."):
            path = ""
        else:
            start = 1 if path.startswith("/") else 0
            cut = path.find("/", start)
            if cut == -1:
                cut = len(path)
            out.append(path[:cut])
            path = path[cut:]
    return "".join(out)


def normalize_url(raw: str, base: str) -> str:
    """Resolve ``raw`` against ``base`` and return the canonical form.

    Scheme and host are lower-cased, default ports and fragments removed and
    dot-segments collapsed. Only http and https URLs are accepted.
    """
    raw = raw.strip()
    try:
        parts = urlsplit(urljoin(base, raw))
        port = parts.port
        host = parts.hostname
    except ValueError as exc:
        raise NormalizationError(f"cannot parse URL {raw!r}: {exc}") from None
    scheme = parts.scheme.lower()
    if scheme not in _DEFAULT_PORTS:
        raise NormalizationError(f"unsupported scheme in {raw!r}")
    if not host:
        raise NormalizationError(f"no host in {raw!r}")
    if ":" in host:
        host = f"[{host}]"
    netloc = host
    if parts.username is not None:
        userinfo = parts.username + (f":{parts.password}" if parts.password is not None else "")
        netloc = f"{userinfo}@{host}"
    if port is not None and port != _DEFAULT_PORTS[scheme]:
        netloc = f"{netloc}:{port}"
    path = _remove_dot_segments(parts.path) or "/"
    return urlunsplit((scheme, netloc, path, parts.query, ""))


@dataclass(frozen=True)
class Link:
    target: str
    anchor_tokens: tuple[str, ...]
    container: Container
    # offset of the anchor's first token within its context
    position: int
    # anchor span [start, end) in the page's body token stream
    start: int = 0
    end: int = 0
    segment: int = -1
    group: int = -1


@dataclass
class Segment:
    kind: Container
    group: int
    start: int
    end: int


@dataclass
class PageDocument:
    url: str
    title: str
    body_tokens: list[str]
    links: list[Link]
    title_tokens: list[str] = field(default_factory=list)
    segments: list[Segment] = field(default_factory=list, repr=False)
    dropped_links: int = 0
    context_window: int = DEFAULT_CONTEXT_WINDOW


@dataclass(frozen=True)
class ContextToken:
    position: int
    text: str
    is_anchor: bool


@dataclass(frozen=True)
class LinkContext:
    link: Link
    tokens: tuple[ContextToken, ...]
    boundary_kind: str  # "paragraph" | "list_items" | "document"

    @property
    def texts(self) -> list[str]:
        return [t.text for t in self.tokens]

    @property
    def anchor_texts(self) -> list[str]:
        return [t.text for t in self.tokens if t.is_anchor]


_BLOCK_TAGS = frozenset(
    """p div li ul ol menu dl dt dd h1 h2 h3 h4 h5 h6 table caption thead tbody tfoot tr td th
    blockquote section article header footer nav aside main form fieldset pre hr address
    figure figcaption body html center details summary""".split()
)
_LIST_TAGS = frozenset({"ul", "ol", "menu"})
_SKIP_TAGS = frozenset({"script", "style", "template", "noscript"})
_VOID_TAGS = frozenset({"hr"})


class _Parser(HTMLParser):
    def __init__(self, base_url: str) -> None:
        super().__init__(convert_charrefs=True)
        self.base_url = base_url
        self.tokens: list[str] = []
        self.segments: list[Segment] = []
        self.current: int | None = None
        # open block elements: (tag, element id)
        self.stack: list[tuple[str, int]] = []
        self.next_id = 0
        self.skip_depth = 0
        self.in_title = False
        self.title_parts: list[str] = []
        self.anchor: dict | None = None
        self.raw_links: list[dict] = []
        self.dropped = 0

    def _new_id(self) -> int:
        self.next_id += 1
        return self.next_id

    def _context_kind(self) -> tuple[Container, int]:
        for i in range(len(self.stack) - 1, -1, -1):
            tag, ident = self.stack[i]
            if tag in ("p", "div"):
                return Container.PARAGRAPH, ident
            if tag == "li":
                for ptag, pid in reversed(self.stack[:i]):
                    if ptag in _LIST_TAGS:
                        return Container.LIST_ITEM, pid
                return Container.LIST_ITEM, ident
            return Container.OTHER, ident
        return Container.OTHER, 0

    def _open_segment(self) -> int:
        if self.current is None:
            kind, group = self._context_kind()
            self.segments.append(Segment(kind, group, len(self.tokens), len(self.tokens)))
            self.current = len(self.segments) - 1
        return self.current

    def _boundary(self) -> None:
        self.current = None

    def _pop_to(self, tag: str) -> None:
        for i in range(len(self.stack) - 1, -1, -1):
            if self.stack[i][0] == tag:
                del self.stack[i:]
                return

    def _close_implicit(self, tag: str) -> None:
        if self.stack and self.stack[-1][0] == "p":
            self.stack.pop()
        if tag in ("li", "dt", "dd"):
            for i in range(len(self.stack) - 1, -1, -1):
                open_tag = self.stack[i][0]
                if open_tag in _LIST_TAGS or open_tag == "dl":
                    break
                if (tag == "li" and open_tag == "li") or (tag != "li" and open_tag in ("dt", "dd")):
                    del self.stack[i:]
                    break

    def handle_starttag(self, tag, attrs):
        if tag in _SKIP_TAGS:
            self.skip_depth += 1
            return
        if tag == "title":
            self.in_title = True
            return
        if tag == "base":
            href = dict(attrs).get("href")
            if href:
                try:
                    self.base_url = normalize_url(href, self.base_url)
                except NormalizationError:
                    pass
            return
        if tag == "a":
            self._close_anchor()
            attr = dict(attrs)
            href = attr.get("href")
            if href is None:
                return
            rel = (attr.get("rel") or "").lower().split()
            self.anchor = {"href": href, "nofollow": "nofollow" in rel, "start": len(self.tokens)}
            self.anchor["segment"] = self._open_segment()
            return
        if tag in _BLOCK_TAGS:
            self._close_implicit(tag)
            self._boundary()
            if tag not in _VOID_TAGS:
                self.stack.append((tag, self._new_id()))

    def handle_startendtag(self, tag, attrs):
        self.handle_starttag(tag, attrs)
        if tag == "a":
            self._close_anchor()
        elif tag in _SKIP_TAGS:
            self.skip_depth -= 1
        elif tag == "title":
            self.in_title = False
        elif tag in _BLOCK_TAGS and tag not in _VOID_TAGS:
            self.handle_endtag(tag)

    def handle_endtag(self, tag):
        if tag in _SKIP_TAGS:
            self.skip_depth = max(0, self.skip_depth - 1)
        elif tag == "title":
            self.in_title = False
        elif tag == "a":
            self._close_anchor()
        elif tag in _BLOCK_TAGS:
            self._pop_to(tag)
            self._boundary()

    def handle_data(self, data):
        if self.skip_depth:
            return
        if self.in_title:
            self.title_parts.append(data)
            return
        words = tokenize(data)
        if not words:
            return
        seg = self.segments[self._open_segment()]
        self.tokens.extend(words)
        seg.end = len(self.tokens)

    def _close_anchor(self) -> None:
        if self.anchor is None:
            return
        anchor, self.anchor = self.anchor, None
        if anchor["nofollow"]:
            self.dropped += 1
            return
        try:
            target = normalize_url(anchor["href"], self.base_url)
        except NormalizationError:
            self.dropped += 1
            return
        anchor["end"] = len(self.tokens)
        anchor["target"] = target
        self.raw_links.append(anchor)

    def finish(self) -> None:
        self._close_anchor()


def _strip_partial_tag(text: str) -> str:
    cut = text.rfind("<")
    if cut != -1 and ">" not in text[cut:]:
        return text[:cut]
    return text


def _context_indices(doc: PageDocument, link: Link) -> tuple[list[int], str]:
    n = len(doc.body_tokens)
    if link.container is Container.OTHER:
        lo = max(0, link.start - doc.context_window)
        hi = min(n, link.end + doc.context_window)
        return list(range(lo, hi)), "document"
    if link.container is Container.LIST_ITEM:
        spans = [
            (s.start, s.end)
            for s in doc.segments
            if s.kind is Container.LIST_ITEM and s.group == link.group
        ]
        kind = "list_items"
    else:
        seg = doc.segments[link.segment]
        spans = [(seg.start, seg.end)]
        kind = "paragraph"
    spans.append((link.start, link.end))
    indices = sorted({i for lo, hi in spans for i in range(lo, hi)})
    return indices, kind


def parse_document(html: bytes | str, base_url: str, context_window: int = DEFAULT_CONTEXT_WINDOW) -> PageDocument:
    """Parse possibly malformed HTML into a :class:`PageDocument`.

    Never raises on content: undecodable bytes are replaced and parser
    failures keep whatever was read up to that point.
    """
    url = normalize_url(base_url, base_url)
    text = html.decode("utf-8", errors="replace") if isinstance(html, (bytes, bytearray)) else html
    parser = _Parser(url)
    try:
        parser.feed(_strip_partial_tag(text))
        parser.close()
    except Exception:  # noqa: BLE001 - tolerate any parser breakage
        pass
    parser.finish()

    doc = PageDocument(
        url=url,
        title=" ".join("".join(parser.title_parts).split()),
        body_tokens=parser.tokens,
        links=[],
        title_tokens=tokenize("".join(parser.title_parts)),
        segments=parser.segments,
        dropped_links=parser.dropped,
        context_window=context_window,
    )
    for raw in parser.raw_links:
        seg = parser.segments[raw["segment"]]
        provisional = Link(
            target=raw["target"],
            anchor_tokens=tuple(parser.tokens[raw["start"] : raw["end"]]),
            container=seg.kind,
            position=0,
            start=raw["start"],
            end=raw["end"],
            segment=raw["segment"],
            group=seg.group,
        )
        indices, _ = _context_indices(doc, provisional)
        position = sum(1 for i in indices if i < provisional.start)
        doc.links.append(
            Link(
                target=provisional.target,
                anchor_tokens=provisional.anchor_tokens,
                container=provisional.container,
                position=position,
                start=provisional.start,
                end=provisional.end,
                segment=provisional.segment,
                group=provisional.group,
            )
        )
    return doc


def extract_context(doc: PageDocument, link: Link) -> LinkContext:
    """Tokens between the break points around ``link``, anchor tokens flagged."""
    if not any(link is l or link == l for l in doc.links):
        raise ValueError(f"link to {link.target!r} does not belong to {doc.url!r}")
    indices, kind = _context_indices(doc, link)
    tokens = tuple(
        ContextToken(pos, doc.body_tokens[i], link.start <= i < link.end)
        for pos, i in enumerate(indices)
    )
    return LinkContext(link=link, tokens=tokens, boundary_kind=kind)
