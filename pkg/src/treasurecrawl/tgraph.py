"""T-Graph: a leveled hierarchy of exemplary documents used to prioritize links.

Level 0 holds the target documents. Level ``k+1`` holds, for every level-``k``
node, the pages linking to it (one node per parent/child pair, so one URL can
appear several times). Each node carries four texts taken from the parent
page: the anchor of the link to the child, the text around that link, the page
title and the page body.

An unvisited link is compared against every node by the overall similarity
measure (OSM), the mean of four cosine similarities. Its priority is the
inverse of the smallest link distance to level 0 among nodes that pass the
OSM threshold.
"""

from __future__ import annotations

import csv
import json
import math
from collections import Counter, deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Protocol, Sequence

import numpy as np
from scipy import sparse

from .pagemodel import LinkContext, PageDocument, extract_context, normalize_url, parse_document
from .text import term_vector, tokenize

__all__ = [
    "ParentLink",
    "ParentProvider",
    "PageInfo",
    "StaticParentProvider",
    "CorpusParentProvider",
    "OsmParams",
    "TGraph",
    "TGraphError",
    "TGraphNode",
    "WatchdogParams",
    "build_tgraph",
    "compute_osm",
    "load_tgraph",
    "save_tgraph",
    "score_link",
    "text_similarity",
    "watchdog_update",
]

FORMAT_VERSION = 1
COMPONENTS = ("anchor_text", "surrounding_text", "title_text", "body_text")


class TGraphError(Exception):
    """Build or persistence failure."""


@dataclass(frozen=True)
class PageInfo:
    title: str
    body: str


@dataclass(frozen=True)
class ParentLink:
    parent_url: str
    anchor: str
    surrounding: str
    title: str
    body: str


class ParentProvider(Protocol):
    def page(self, url: str) -> Optional[PageInfo]:
        """Title and body of ``url``, or None if the provider does not know it."""

    def parents(self, url: str) -> list[ParentLink]:
        """Pages linking to ``url``, in a stable order."""


class StaticParentProvider:
    """Parent map read from ``child_url, parent_url, anchor, surrounding, title, body_path`` TSV.

    A row with an empty ``parent_url`` describes the child page itself (its
    title and body), which is how targets without parents become resolvable.
    ``body_path`` is relative to the TSV; HTML files are reduced to their
    visible body text.
    """

    def __init__(self, rows: Iterable[Sequence[str]], root: Path | None = None) -> None:
        self.root = root or Path(".")
        self._pages: dict[str, PageInfo] = {}
        self._parents: dict[str, list[ParentLink]] = {}
        self._body_cache: dict[str, str] = {}
        for lineno, row in enumerate(rows, start=1):
            if len(row) != 6:
                raise TGraphError(f"parent map line {lineno}: expected 6 columns, got {len(row)}")
            child, parent, anchor, surrounding, title, body_path = row
            child = normalize_url(child, child)
            if not parent:
                self._pages[child] = PageInfo(title, self._read_body(body_path))
                continue
            parent = normalize_url(parent, parent)
            links = self._parents.setdefault(child, [])
            if parent == child or any(l.parent_url == parent for l in links):
                continue
            body = self._read_body(body_path)
            links.append(ParentLink(parent, anchor, surrounding, title, body))
            self._pages.setdefault(parent, PageInfo(title, body))

    @classmethod
    def from_tsv(cls, path: str | Path) -> "StaticParentProvider":
        path = Path(path)
        if not path.is_file():
            raise TGraphError(f"no such file: {path}")
        with path.open(encoding="utf-8", newline="") as fh:
            rows = [r for r in csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE) if r and not r[0].startswith("#")]
        return cls(rows, root=path.parent)

    def _read_body(self, body_path: str) -> str:
        if not body_path:
            return ""
        if body_path not in self._body_cache:
            full = self.root / body_path
            try:
                data = full.read_bytes()
            except OSError as exc:
                raise TGraphError(f"cannot read body {full}: {exc}") from None
            if full.suffix.lower() in (".html", ".htm"):
                text = " ".join(parse_document(data, "http://localhost/").body_tokens)
            else:
                text = data.decode("utf-8", errors="replace")
            self._body_cache[body_path] = text
        return self._body_cache[body_path]

    def page(self, url: str) -> Optional[PageInfo]:
        url = normalize_url(url, url)
        if url in self._pages:
            return self._pages[url]
        if url in self._parents:
            return PageInfo("", "")
        return None

    def parents(self, url: str) -> list[ParentLink]:
        return list(self._parents.get(normalize_url(url, url), ()))


class CorpusParentProvider:
    """Link-inversion index over a set of parsed pages."""

    def __init__(self, docs: Iterable[PageDocument]) -> None:
        self._pages: dict[str, PageInfo] = {}
        self._parents: dict[str, list[ParentLink]] = {}
        for doc in docs:
            body = " ".join(doc.body_tokens)
            self._pages[doc.url] = PageInfo(doc.title, body)
            for link in doc.links:
                if link.target == doc.url:
                    continue
                links = self._parents.setdefault(link.target, [])
                if any(l.parent_url == doc.url for l in links):
                    continue
                ctx = extract_context(doc, link)
                links.append(ParentLink(doc.url, " ".join(link.anchor_tokens), " ".join(ctx.texts), doc.title, body))

    def page(self, url: str) -> Optional[PageInfo]:
        return self._pages.get(url)

    def parents(self, url: str) -> list[ParentLink]:
        return list(self._parents.get(url, ()))


@dataclass
class TGraphNode:
    id: str
    level: int
    url: str
    anchor_text: str = ""
    surrounding_text: str = ""
    title_text: str = ""
    body_text: str = ""
    vectors: tuple[Counter, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.vectors = tuple(term_vector(tokenize(getattr(self, c))) for c in COMPONENTS)

    def to_json(self) -> dict:
        return {"id": self.id, "level": self.level, "url": self.url, **{c: getattr(self, c) for c in COMPONENTS}}


@dataclass
class TGraph:
    nodes: list[TGraphNode]
    edges: list[tuple[str, str]]  # (child_id, parent_id)
    depth: int = 3

    def __post_init__(self) -> None:
        self._index: Optional[_OsmIndex] = None
        self._distances: Optional[dict[str, int]] = None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TGraph):
            return NotImplemented
        return self.depth == other.depth and self.nodes == other.nodes and self.edges == other.edges

    def node(self, node_id: str) -> TGraphNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def level_counts(self) -> dict[int, int]:
        return dict(sorted(Counter(n.level for n in self.nodes).items()))

    def url_occurrences(self) -> Counter:
        return Counter(n.url for n in self.nodes)

    def distances(self) -> dict[str, int]:
        """Shortest edge count from each node down to any level-0 node."""
        if self._distances is None:
            # BFS upward from level 0 along reversed edges
            dist = {n.id: 0 for n in self.nodes if n.level == 0}
            queue = deque(dist)
            parents_of: dict[str, list[str]] = {}
            for child, parent in self.edges:
                parents_of.setdefault(child, []).append(parent)
            while queue:
                cur = queue.popleft()
                for parent in parents_of.get(cur, ()):
                    if parent not in dist:
                        dist[parent] = dist[cur] + 1
                        queue.append(parent)
            self._distances = dist
        return self._distances

    def index(self) -> "_OsmIndex":
        if self._index is None:
            self._index = _OsmIndex(self)
        return self._index

    def _invalidate(self) -> None:
        self._index = None
        self._distances = None


@dataclass(frozen=True)
class OsmParams:
    osm_threshold: float = 0.05
    unrelated_priority: float = 0.01

    def __post_init__(self) -> None:
        if not 0.0 <= self.osm_threshold <= 1.0:
            raise ValueError("osm_threshold must lie in [0, 1]")
        if not 0.0 < self.unrelated_priority < 1.0:
            raise ValueError("unrelated_priority must lie in (0, 1)")


def build_tgraph(
    targets: Sequence[str],
    provider: ParentProvider,
    depth: int = 3,
    max_parents_per_node: int = 5,
) -> TGraph:
    """Build the graph bottom-up from ``targets`` through ``provider``."""
    if not targets:
        raise TGraphError("no target documents given")
    if depth < 1:
        raise TGraphError("depth must be >= 1")
    nodes: list[TGraphNode] = []
    edges: list[tuple[str, str]] = []
    missing: list[str] = []
    frontier: list[TGraphNode] = []
    for url in targets:
        url = normalize_url(url, url)
        info = provider.page(url)
        if info is None:
            missing.append(url)
            continue
        node = TGraphNode(f"n{len(nodes)}", 0, url, title_text=info.title, body_text=info.body)
        nodes.append(node)
        frontier.append(node)
    if missing:
        raise TGraphError("targets not resolvable by provider: " + ", ".join(missing))
    for level in range(1, depth + 1):
        next_frontier: list[TGraphNode] = []
        for child in frontier:
            for plink in provider.parents(child.url)[:max_parents_per_node]:
                node = TGraphNode(
                    f"n{len(nodes)}",
                    level,
                    plink.parent_url,
                    anchor_text=plink.anchor,
                    surrounding_text=plink.surrounding,
                    title_text=plink.title,
                    body_text=plink.body,
                )
                nodes.append(node)
                edges.append((child.id, node.id))
                next_frontier.append(node)
        frontier = next_frontier
        if not frontier:
            break
    return TGraph(nodes, edges, depth)


def text_similarity(a: Mapping[str, float], b: Mapping[str, float]) -> float:
    """Cosine similarity of two term-frequency vectors; 0 if either is empty."""
    if not a or not b:
        return 0.0
    if len(a) > len(b):
        a, b = b, a
    dot = sum(v * b.get(k, 0) for k, v in a.items())
    if dot == 0:
        return 0.0
    norm = math.sqrt(sum(v * v for v in a.values())) * math.sqrt(sum(v * v for v in b.values()))
    return min(1.0, dot / norm)


def link_vectors(ctx: LinkContext, doc: PageDocument) -> tuple[Counter, Counter, Counter, Counter]:
    return (
        term_vector(ctx.link.anchor_tokens),
        term_vector(ctx.texts),
        term_vector(doc.title_tokens),
        term_vector(doc.body_tokens),
    )


def compute_osm(ctx: LinkContext, parent_doc: PageDocument, node: TGraphNode) -> float:
    """Mean of the anchor, surrounding, title and body similarities."""
    vecs = link_vectors(ctx, parent_doc)
    return sum(text_similarity(v, nv) for v, nv in zip(vecs, node.vectors)) / 4.0


def _priority(osm: Iterable[float], graph: TGraph, params: OsmParams) -> float:
    dist = graph.distances()
    best = 0.0
    for node, value in zip(graph.nodes, osm):
        if value >= params.osm_threshold and node.id in dist:
            best = max(best, 1.0 / max(dist[node.id], 1))
    return best if best > 0 else params.unrelated_priority


def score_link(ctx: LinkContext, parent_doc: PageDocument, graph: TGraph, params: OsmParams) -> float:
    """Priority in ``[unrelated_priority, 1]`` for an on-topic unvisited link."""
    vecs = link_vectors(ctx, parent_doc)
    osm = [sum(text_similarity(v, nv) for v, nv in zip(vecs, n.vectors)) / 4.0 for n in graph.nodes]
    return _priority(osm, graph, params)


class _OsmIndex:
    """Row-normalized sparse term matrices, one per component, for batch OSM."""

    def __init__(self, graph: TGraph) -> None:
        vocab: dict[str, int] = {}
        for node in graph.nodes:
            for vec in node.vectors:
                for term in vec:
                    vocab.setdefault(term, len(vocab))
        self.vocab = vocab
        self.matrices = [self._matrix([n.vectors[c] for n in graph.nodes]) for c in range(4)]

    def _matrix(self, vectors: Sequence[Mapping[str, float]]) -> sparse.csr_matrix:
        rows, cols, vals = [], [], []
        for r, vec in enumerate(vectors):
            norm = math.sqrt(sum(v * v for v in vec.values()))
            if norm == 0:
                continue
            for term, v in vec.items():
                col = self.vocab.get(term)
                if col is not None:
                    rows.append(r)
                    cols.append(col)
                    vals.append(v / norm)
        return sparse.csr_matrix((vals, (rows, cols)), shape=(len(vectors), len(self.vocab)))

    def similarities(self, component: int, vectors: Sequence[Mapping[str, float]]) -> np.ndarray:
        """(len(vectors), n_nodes) cosine matrix for one component."""
        rows, cols, vals = [], [], []
        for r, vec in enumerate(vectors):
            norm = math.sqrt(sum(v * v for v in vec.values()))
            if norm == 0:
                continue
            for term, v in vec.items():
                col = self.vocab.get(term)
                if col is not None:
                    rows.append(r)
                    cols.append(col)
                    vals.append(v / norm)
        query = sparse.csr_matrix((vals, (rows, cols)), shape=(len(vectors), len(self.vocab)))
        return np.minimum((query @ self.matrices[component].T).toarray(), 1.0)


def score_links(contexts: Sequence[LinkContext], parent_doc: PageDocument, graph: TGraph, params: OsmParams) -> list[float]:
    """Batch form of :func:`score_link` for all links of one page."""
    if not contexts:
        return []
    if not graph.nodes:
        return [params.unrelated_priority] * len(contexts)
    index = graph.index()
    anchors = [term_vector(c.link.anchor_tokens) for c in contexts]
    around = [term_vector(c.texts) for c in contexts]
    page = [term_vector(parent_doc.title_tokens), term_vector(parent_doc.body_tokens)]
    page_sims = index.similarities(2, page[:1]) + index.similarities(3, page[1:])
    osm = (index.similarities(0, anchors) + index.similarities(1, around) + page_sims) / 4.0
    return [_priority(row, graph, params) for row in osm]


@dataclass(frozen=True)
class WatchdogParams:
    enabled: bool = False
    interval: int = 500
    promote_threshold: float = 0.5
    max_nodes: int = 20


def page_similarity(doc: PageDocument, node: TGraphNode) -> float:
    """Title/body similarity of a crawled page to a node.

    Target nodes have no incoming-link texts, so only the two page-level
    components are comparable.
    """
    return (
        text_similarity(term_vector(doc.title_tokens), node.vectors[2])
        + text_similarity(term_vector(doc.body_tokens), node.vectors[3])
    ) / 2.0


def watchdog_update(
    graph: TGraph,
    experience: Iterable[PageDocument],
    params: WatchdogParams,
    already_added: int = 0,
) -> TGraph:
    """Return a new graph with qualifying on-topic pages appended at level 1.

    ``experience`` holds pages the crawler classified on-topic. A page
    qualifies when its similarity to some target node reaches
    ``promote_threshold``; it is linked to the most similar target. At most
    ``max_nodes - already_added`` nodes are added; nothing is ever removed.
    """
    if not params.enabled:
        return graph
    budget = params.max_nodes - already_added
    targets = [n for n in graph.nodes if n.level == 0]
    nodes = list(graph.nodes)
    edges = list(graph.edges)
    next_id = len(nodes)
    for doc in experience:
        if budget <= 0 or not targets:
            break
        sims = [page_similarity(doc, t) for t in targets]
        best = max(range(len(targets)), key=lambda i: sims[i])
        if sims[best] < params.promote_threshold:
            continue
        while any(n.id == f"n{next_id}" for n in nodes):
            next_id += 1
        node = TGraphNode(f"n{next_id}", 1, doc.url, title_text=doc.title, body_text=" ".join(doc.body_tokens))
        next_id += 1
        nodes.append(node)
        edges.append((targets[best].id, node.id))
        budget -= 1
    if len(nodes) == len(graph.nodes):
        return graph
    return TGraph(nodes, edges, graph.depth)


def save_tgraph(graph: TGraph, path: str | Path) -> None:
    payload = {
        "version": FORMAT_VERSION,
        "depth": graph.depth,
        "nodes": [n.to_json() for n in graph.nodes],
        "edges": [list(e) for e in graph.edges],
    }
    Path(path).write_text(json.dumps(payload, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")


def load_tgraph(path: str | Path) -> TGraph:
    path = Path(path)
    if not path.is_file():
        raise TGraphError(f"no such file: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise TGraphError(f"malformed T-Graph file {path}: {exc}") from None
    if not isinstance(payload, dict) or payload.get("version", FORMAT_VERSION) != FORMAT_VERSION:
        raise TGraphError(f"unsupported T-Graph format in {path}")
    try:
        nodes = [
            TGraphNode(str(n["id"]), int(n["level"]), str(n["url"]), *(str(n[c]) for c in COMPONENTS))
            for n in payload["nodes"]
        ]
        edges = [(str(c), str(p)) for c, p in payload["edges"]]
        depth = int(payload["depth"])
    except (KeyError, TypeError, ValueError) as exc:
        raise TGraphError(f"malformed T-Graph file {path}: {exc}") from None
    ids = {n.id for n in nodes}
    if any(c not in ids or p not in ids for c, p in edges):
        raise TGraphError(f"malformed T-Graph file {path}: edge refers to unknown node")
    return TGraph(nodes, edges, depth)
