"""Topical focus prediction from plotted D-number points.

Every taxonomy hit in a link's context becomes one point per code. A point
weighs ``anchor_impact`` if it comes from anchor text (1.0 otherwise), scaled
by how many digits its code carries. The galaxy is the code prefix with the
largest weighted mass, discounted by prefix length so that broad classes only
win when they collect clearly more evidence than any specific one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .pagemodel import LinkContext, PageDocument
from .taxonomy import Taxonomy, TopicProfile, lookup_terms, truncate_code

__all__ = [
    "DetectorParams",
    "GalaxyResult",
    "PlotPoint",
    "PointCloud",
    "TopicDecision",
    "classify_cloud",
    "classify_link",
    "classify_page",
    "detect_galaxy",
    "match_profile",
    "plot_points",
    "plot_tokens",
]


@dataclass(frozen=True)
class DetectorParams:
    anchor_impact: float = 1.40
    max_dnumber_length: int = 3

    def __post_init__(self) -> None:
        if self.anchor_impact <= 0:
            raise ValueError("anchor_impact must be positive")
        if self.max_dnumber_length < 1:
            raise ValueError("max_dnumber_length must be >= 1")


@dataclass(frozen=True)
class PlotPoint:
    position: int
    code: str
    full_len: int
    is_anchor: bool
    weight: float


def point_weight(is_anchor: bool, full_len: int, params: DetectorParams) -> float:
    factor = params.anchor_impact if is_anchor else 1.0
    return factor * (full_len / params.max_dnumber_length)


def make_point(position: int, code: str, is_anchor: bool, params: DetectorParams, full_len: int | None = None) -> PlotPoint:
    """Build a point for an already truncated ``code``; ``full_len`` defaults to its length."""
    if full_len is None:
        full_len = len(code)
    full_len = min(full_len, params.max_dnumber_length)
    return PlotPoint(position, code, full_len, is_anchor, point_weight(is_anchor, full_len, params))


@dataclass(frozen=True)
class PointCloud:
    points: tuple[PlotPoint, ...]

    @property
    def total_weight(self) -> float:
        return sum(p.weight for p in self.points)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class GalaxyResult:
    prefix: str
    score: float
    support: int
    anchor_support: int


@dataclass(frozen=True)
class TopicDecision:
    on_topic: bool
    galaxy: Optional[GalaxyResult] = None
    matched_code: Optional[str] = None


def plot_tokens(
    tokens: Sequence[str],
    flags: Sequence[bool],
    positions: Sequence[int],
    taxonomy: Taxonomy,
    params: DetectorParams,
) -> list[PlotPoint]:
    points: list[PlotPoint] = []
    for i, codes in lookup_terms(tokens, taxonomy):
        for code in sorted(codes):
            trunc = truncate_code(code, params.max_dnumber_length)
            points.append(make_point(positions[i], trunc, flags[i], params, full_len=code.digit_count))
    return points


def plot_points(ctx: LinkContext, taxonomy: Taxonomy, params: DetectorParams) -> PointCloud:
    texts = [t.text for t in ctx.tokens]
    flags = [t.is_anchor for t in ctx.tokens]
    positions = [t.position for t in ctx.tokens]
    return PointCloud(tuple(plot_tokens(texts, flags, positions, taxonomy, params)))


def detect_galaxy(cloud: PointCloud | Iterable[PlotPoint], params: DetectorParams) -> Optional[GalaxyResult]:
    """Return the best-scoring code prefix of the cloud, or ``None`` if empty.

    score(q) = (sum of weights of points under q) * len(q) / max_dnumber_length.
    Ties go to the longer prefix, then to more anchor points, then to the
    lexicographically smaller prefix.
    """
    points = cloud.points if isinstance(cloud, PointCloud) else tuple(cloud)
    mass: dict[str, list] = {}
    for p in points:
        for k in range(1, min(len(p.code), params.max_dnumber_length) + 1):
            acc = mass.get(p.code[:k])
            if acc is None:
                acc = mass[p.code[:k]] = [0.0, 0, 0]
            acc[0] += p.weight
            acc[1] += 1
            acc[2] += p.is_anchor
    best: Optional[GalaxyResult] = None
    best_key = None
    for prefix, (weight, support, anchors) in mass.items():
        score = weight * len(prefix) / params.max_dnumber_length
        key = (score, len(prefix), anchors)
        if best_key is None or key > best_key or (key == best_key and prefix < best.prefix):
            best_key = key
            best = GalaxyResult(prefix, score, support, anchors)
    return best


def match_profile(prefix: str, profile: TopicProfile) -> Optional[str]:
    """Profile code in a prefix relation with ``prefix``; longest wins, then smallest."""
    related = [c for c in profile.codes if c.startswith(prefix) or prefix.startswith(c)]
    if not related:
        return None
    return min(related, key=lambda c: (-len(c), c))


def classify_cloud(cloud: PointCloud, profile: TopicProfile, params: DetectorParams) -> TopicDecision:
    galaxy = detect_galaxy(cloud, params)
    if galaxy is None:
        return TopicDecision(False)
    matched = match_profile(galaxy.prefix, profile)
    return TopicDecision(matched is not None, galaxy, matched)


def classify_link(ctx: LinkContext, taxonomy: Taxonomy, profile: TopicProfile, params: DetectorParams) -> TopicDecision:
    return classify_cloud(plot_points(ctx, taxonomy, params), profile, params)


def page_cloud(doc: PageDocument, taxonomy: Taxonomy, params: DetectorParams) -> PointCloud:
    # title and body are scanned separately so phrases never straddle them
    nt = len(doc.title_tokens)
    title_pts = plot_tokens(doc.title_tokens, [True] * nt, range(nt), taxonomy, params)
    nb = len(doc.body_tokens)
    body_pts = plot_tokens(doc.body_tokens, [False] * nb, range(nt, nt + nb), taxonomy, params)
    return PointCloud(tuple(title_pts + body_pts))


def classify_page(doc: PageDocument, taxonomy: Taxonomy, profile: TopicProfile, params: DetectorParams) -> TopicDecision:
    """Whole-page decision; title tokens weigh like anchor text."""
    return classify_cloud(page_cloud(doc, taxonomy, params), profile, params)
