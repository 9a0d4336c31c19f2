"""Deterministic synthetic web corpora for desk-scale crawl experiments.

On-topic pages form clusters that link densely among themselves. Clusters
are chained together only through bridges of off-topic pages, and every
cluster owns a region of off-topic filler pages that never leads to another
cluster. Anchor and surrounding texts describe the linked page, with a
configurable share of misleading descriptions.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field
from html import escape
from pathlib import Path
from typing import Optional

from .crawlcore.config import CrawlConfig, format_config
from .taxonomy import Taxonomy, TopicProfile, default_profile, default_taxonomy, truncate_code
from .text import stem_token, tokenize
from .tgraph import StaticParentProvider, build_tgraph, save_tgraph

NEUTRAL_WORDS = (
    "the and of to in for with on this that is are was our your more about here page site read see find "
    "new best top free online information welcome home also many some people time year day great good "
    "world today help click visit list latest other first last every well just like make know look way "
    "part place thing case week point group number fact hand area"
).split()


class CorpusError(ValueError):
    pass


@dataclass
class CorpusSpec:
    total_pages: int = 200
    cluster_count: int = 2
    cluster_size: int = 40
    bridge_length: int = 3
    on_topic_token_pool: list[str] = field(default_factory=list)
    off_topic_token_pool: list[str] = field(default_factory=list)
    rng_seed: int = 7
    intra_links: int = 5
    offtopic_links: int = 1
    filler_links: int = 3
    filler_hub_bias: float = 0.5
    filler_to_cluster: float = 0.05
    # share of filler links leaving their own region; 0 keeps every region a
    # dead end so clusters meet only through the bridges
    cross_region: float = 0.0
    context_noise: float = 0.1
    content_noise: float = 0.1
    target_count: int = 4

    def validate(self) -> "CorpusSpec":
        if self.cluster_count < 1 or self.cluster_size < 2:
            raise CorpusError("need at least one cluster of two pages")
        if self.bridge_length < 0:
            raise CorpusError("bridge_length must be >= 0")
        needed = self.cluster_count * self.cluster_size + (self.cluster_count - 1) * self.bridge_length
        if self.total_pages < needed:
            raise CorpusError(f"total_pages={self.total_pages} cannot hold clusters and bridges ({needed} pages)")
        for name in ("context_noise", "content_noise", "filler_to_cluster", "filler_hub_bias", "cross_region"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise CorpusError(f"{name} must lie in [0, 1]")
        if min(self.intra_links, self.offtopic_links, self.filler_links) < 0:
            raise CorpusError("link counts must be >= 0")
        if self.target_count < 1:
            raise CorpusError("target_count must be >= 1")
        return self

    @classmethod
    def from_json(cls, path: str | Path) -> "CorpusSpec":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise CorpusError(f"cannot read corpus spec {path}: {exc}") from None
        unknown = set(data) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise CorpusError(f"unknown corpus spec keys: {sorted(unknown)}")
        return cls(**data)


def default_pools(taxonomy: Taxonomy, profile: TopicProfile, max_len: int = 3) -> tuple[list[str], list[str]]:
    """Surface terms of the taxonomy, split by whether their code is in the profile."""
    on: list[str] = []
    off: list[str] = []
    for entry in taxonomy.entries:
        code = truncate_code(entry.code, max_len)
        related = any(c.startswith(code) or code.startswith(c) for c in profile.codes)
        for term in entry.source_terms:
            pool = on if related else off
            if term not in on and term not in off:
                pool.append(term)
    return on, off


@dataclass
class Page:
    url: str
    label: bool
    role: str  # cluster | bridge | filler
    region: int
    theme: list[str]
    links: list[tuple[str, bool]] = field(default_factory=list)  # (target url, in list block)


@dataclass
class Corpus:
    pages: list[Page]
    seeds: list[str]
    targets: list[str]

    def page(self, url: str) -> Page:
        for p in self.pages:
            if p.url == url:
                return p
        raise KeyError(url)


def _neutral(taxonomy: Taxonomy) -> list[str]:
    return [w for w in NEUTRAL_WORDS if stem_token(w) not in taxonomy.term_index]


class _Writer:
    def __init__(self, rng: random.Random, on_pool: list[str], off_pool: list[str], neutral: list[str], spec: CorpusSpec):
        self.rng = rng
        self.on_pool = on_pool
        self.off_pool = off_pool
        self.neutral = neutral
        self.spec = spec

    def sentence(self, theme: list[str], topic_words: int, filler_words: int) -> list[str]:
        words = [self.rng.choice(theme) for _ in range(topic_words)]
        words += [self.rng.choice(self.neutral) for _ in range(filler_words)]
        self.rng.shuffle(words)
        return words

    def describe(self, target: Page) -> list[str]:
        theme = target.theme
        if self.rng.random() < self.spec.context_noise:
            theme = self.rng.sample(self.off_pool if target.label else self.on_pool, 4)
        return theme


def _theme(rng: random.Random, pool: list[str], size: int = 6) -> list[str]:
    return rng.sample(pool, min(size, len(pool)))


def build_corpus(spec: CorpusSpec, taxonomy: Optional[Taxonomy] = None, profile: Optional[TopicProfile] = None) -> Corpus:
    """Lay out pages, labels and links; no HTML yet."""
    spec.validate()
    taxonomy = taxonomy or default_taxonomy()
    profile = profile or default_profile()
    on_pool, off_pool = spec.on_topic_token_pool, spec.off_topic_token_pool
    if not on_pool or not off_pool:
        d_on, d_off = default_pools(taxonomy, profile)
        on_pool = on_pool or d_on
        off_pool = off_pool or d_off
    rng = random.Random(spec.rng_seed)

    clusters: list[list[Page]] = []
    for c in range(spec.cluster_count):
        sub_pool = _theme(rng, on_pool, max(6, len(on_pool) // 2))
        clusters.append(
            [
                Page(f"http://cluster{c + 1}.example.org/page{i}.html", True, "cluster", c, _theme(rng, sub_pool))
                for i in range(spec.cluster_size)
            ]
        )
    bridges: list[list[Page]] = []
    for c in range(spec.cluster_count - 1):
        bridges.append(
            [
                Page(f"http://bridge{c + 1}.example.net/hop{j}.html", False, "bridge", c, _theme(rng, off_pool))
                for j in range(spec.bridge_length)
            ]
        )
    n_filler = spec.total_pages - spec.cluster_count * spec.cluster_size - (spec.cluster_count - 1) * spec.bridge_length
    regions: list[list[Page]] = [[] for _ in range(spec.cluster_count)]
    for k in range(n_filler):
        region = k % spec.cluster_count
        regions[region].append(
            Page(f"http://site{k // 25}.example.com/doc{k}.html", False, "filler", region, _theme(rng, off_pool))
        )

    def pick_filler(region: int) -> Optional[Page]:
        pool = regions[region]
        if not pool:
            return None
        if rng.random() < spec.filler_hub_bias:
            # hubs: the first few pages of a region attract most links
            return pool[min(int(rng.expovariate(1.0 / 3.0)), len(pool) - 1)]
        return rng.choice(pool)

    for c, members in enumerate(clusters):
        for i, page in enumerate(members):
            # a ring keeps every cluster strongly connected
            ring = members[(i + 1) % len(members)]
            others = [p for p in members if p is not page and p is not ring]
            chosen = [ring] + rng.sample(others, min(max(spec.intra_links - 1, 0), len(others)))
            for j, target in enumerate(chosen):
                page.links.append((target.url, j >= 2))
            for _ in range(spec.offtopic_links):
                filler = pick_filler(c)
                if filler is not None:
                    page.links.append((filler.url, False))
    for c, chain in enumerate(bridges):
        entry = rng.choice(clusters[c])
        exit_page = rng.choice(clusters[c + 1])
        hops = chain + [exit_page]
        if chain:
            entry.links.append((chain[0].url, False))
        else:
            entry.links.append((exit_page.url, False))
        for a, b in zip(chain, hops[1:]):
            a.links.append((b.url, False))
    for region, members in enumerate(regions):
        # every filler page gets one incoming link from an earlier page of
        # its region, so the whole corpus is reachable from the seed
        if members:
            anchor_page = clusters[region][0]
            if all(t != members[0].url for t, _ in anchor_page.links):
                anchor_page.links.append((members[0].url, False))
        for k in range(1, len(members)):
            members[rng.randrange(k)].links.append((members[k].url, False))
        for page in members:
            for _ in range(spec.filler_links):
                dest = region
                if spec.cross_region and rng.random() < spec.cross_region:
                    dest = rng.randrange(spec.cluster_count)
                if rng.random() < spec.filler_to_cluster:
                    target = rng.choice(clusters[dest])
                else:
                    target = pick_filler(dest)
                if target is not None and target is not page and all(t != target.url for t, _ in page.links):
                    page.links.append((target.url, False))

    pages = [p for group in clusters for p in group] + [p for chain in bridges for p in chain] + [
        p for region in regions for p in region
    ]
    seeds = [clusters[0][0].url]
    targets: list[str] = []
    i = 1
    while len(targets) < spec.target_count and i < spec.cluster_size:
        for members in clusters:
            if len(targets) < spec.target_count:
                targets.append(members[i].url)
        i += 1
    return Corpus(pages, seeds, targets)


def render_page(page: Page, corpus_index: dict[str, Page], writer: _Writer) -> str:
    rng = writer.rng
    spec = writer.spec
    other_pool = writer.off_pool if page.label else writer.on_pool

    def words(n_topic: int, n_neutral: int) -> str:
        out = writer.sentence(page.theme, n_topic, n_neutral)
        if rng.random() < spec.content_noise:
            out[rng.randrange(len(out))] = rng.choice(other_pool)
        return " ".join(out)

    title = " ".join(rng.sample(page.theme, 2)).title()
    parts = [f"<html><head><title>{escape(title)}</title></head><body>", f"<h1>{escape(title)}</h1>"]
    parts.append(f"<p>{escape(words(4, 8))}</p>")
    listed = []
    for url, in_list in page.links:
        target = corpus_index[url]
        theme = writer.describe(target)
        anchor = " ".join(rng.sample(theme, min(2, len(theme))))
        if in_list:
            listed.append(f'<li><a href="{escape(url)}">{escape(anchor)}</a></li>')
            continue
        before = " ".join(writer.sentence(theme, 2, 4))
        after = " ".join(writer.sentence(theme, 1, 3))
        parts.append(f'<p>{escape(before)} <a href="{escape(url)}">{escape(anchor)}</a> {escape(after)}</p>')
        if rng.random() < 0.5:
            parts.append(f"<p>{escape(words(3, 6))}</p>")
    if listed:
        parts.append("<h2>Related</h2><ul>" + "".join(listed) + "</ul>")
    parts.append(f"<p>{escape(words(3, 7))}</p>")
    parts.append("</body></html>")
    return "\n".join(parts) + "\n"


def _relpath(url: str) -> str:
    rest = url.split("://", 1)[1]
    return "pages/" + rest


def write_corpus(
    spec: CorpusSpec,
    out_dir: str | Path,
    taxonomy: Optional[Taxonomy] = None,
    profile: Optional[TopicProfile] = None,
) -> Corpus:
    """Generate the corpus under ``out_dir``.

    Writes ``pages/``, ``manifest.jsonl``, ``labels.tsv``, ``parents.tsv``,
    ``seeds.txt``, ``targets.txt``, ``corpus_spec.json``, a depth-3
    ``tgraph.json`` built from the parent map and a ready ``crawl.conf``.
    """
    spec.validate()
    taxonomy = taxonomy or default_taxonomy()
    profile = profile or default_profile()
    corpus = build_corpus(spec, taxonomy, profile)
    on_pool, off_pool = spec.on_topic_token_pool, spec.off_topic_token_pool
    if not on_pool or not off_pool:
        d_on, d_off = default_pools(taxonomy, profile)
        on_pool = on_pool or d_on
        off_pool = off_pool or d_off
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    writer = _Writer(random.Random(spec.rng_seed + 1), on_pool, off_pool, _neutral(taxonomy), spec)
    index = {p.url: p for p in corpus.pages}
    manifest = []
    for page in corpus.pages:
        rel = _relpath(page.url)
        target = out / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(render_page(page, index, writer), encoding="utf-8")
        manifest.append(json.dumps({"url": page.url, "path": rel, "status": 200}))
    (out / "manifest.jsonl").write_text("\n".join(manifest) + "\n", encoding="utf-8")
    (out / "labels.tsv").write_text("".join(f"{p.url}\t{int(p.label)}\n" for p in corpus.pages), encoding="utf-8")
    (out / "seeds.txt").write_text("".join(u + "\n" for u in corpus.seeds), encoding="utf-8")
    (out / "targets.txt").write_text("".join(u + "\n" for u in corpus.targets), encoding="utf-8")
    (out / "corpus_spec.json").write_text(json.dumps(asdict(spec), indent=1) + "\n", encoding="utf-8")
    _write_parent_map(corpus, out)
    graph = build_tgraph(corpus.targets, StaticParentProvider.from_tsv(out / "parents.tsv"), depth=3)
    save_tgraph(graph, out / "tgraph.json")
    config = CrawlConfig(
        tgraph=out / "tgraph.json",
        corpus_manifest=out / "manifest.jsonl",
        seeds=out / "seeds.txt",
        labels=out / "labels.tsv",
        output_dir=out / "run",
    )
    (out / "crawl.conf").write_text(format_config(config, out), encoding="utf-8")
    return corpus


def _clean(text: str) -> str:
    return " ".join(tokenize(text))


def _write_parent_map(corpus: Corpus, out: Path) -> None:
    from .pagemodel import extract_context, parse_document

    rows = []
    for page in corpus.pages:
        rel = _relpath(page.url)
        doc = parse_document((out / rel).read_bytes(), page.url)
        rows.append((page.url, "", "", "", _clean(doc.title), rel))
        for link in doc.links:
            ctx = extract_context(doc, link)
            rows.append((link.target, page.url, " ".join(link.anchor_tokens), " ".join(ctx.texts), _clean(doc.title), rel))
    rows.sort(key=lambda r: (r[0], r[1] != "", r[1]))
    header = "# child_url\tparent_url\tanchor\tsurrounding\ttitle\tbody_path\n"
    (out / "parents.tsv").write_text(header + "".join("\t".join(r) + "\n" for r in rows), encoding="utf-8")
