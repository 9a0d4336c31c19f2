import math
import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from treasurecrawl.pagemodel import extract_context, parse_document
from treasurecrawl.tgraph import (
    CorpusParentProvider,
    OsmParams,
    StaticParentProvider,
    TGraph,
    TGraphError,
    TGraphNode,
    WatchdogParams,
    build_tgraph,
    compute_osm,
    load_tgraph,
    save_tgraph,
    score_link,
    score_links,
    text_similarity,
    watchdog_update,
)

TARGETS = [f"http://t{i}.org/" for i in range(4)]


def parent_rows(seed=1, fan=3, levels=3, pool=12):
    """Random parent map: each page gets ``fan`` parents drawn from a shared
    pool, so one parent URL typically serves several children."""
    rng = random.Random(seed)
    rows = [(t, "", "", "", f"target {i}", "") for i, t in enumerate(TARGETS)]
    pages = list(TARGETS)
    done = set()
    for level in range(levels):
        next_pages = []
        for child in pages:
            if child in done:
                continue
            done.add(child)
            for j in rng.sample(range(pool), fan):
                parent = f"http://p{level}-{j}.net/"
                rows.append((child, parent, f"anchor {j}", f"around {child} {j}", f"title {level} {j}", ""))
                next_pages.append(parent)
        pages = next_pages
    return rows


def test_build_levels_and_multiplicity():
    g = build_tgraph(TARGETS, StaticParentProvider(parent_rows()), depth=3)
    levels = g.level_counts()
    assert levels[0] == 4 and set(levels) == {0, 1, 2, 3}
    ids = {n.id: n for n in g.nodes}
    assert all(ids[p].level == ids[c].level + 1 for c, p in g.edges)
    occ = g.url_occurrences()
    assert sum(occ.values()) == len(g.nodes)
    assert max(occ.values()) > 1  # shared parents become several nodes
    assert set(g.distances()) == set(ids)


def test_shared_parent_gives_two_nodes():
    rows = [
        ("http://a.org/", "", "", "", "a", ""),
        ("http://b.org/", "", "", "", "b", ""),
        ("http://a.org/", "http://hub.org/", "to a", "", "hub", ""),
        ("http://b.org/", "http://hub.org/", "to b", "", "hub", ""),
    ]
    g = build_tgraph(["http://a.org/", "http://b.org/"], StaticParentProvider(rows), depth=2)
    hubs = [n for n in g.nodes if n.url == "http://hub.org/"]
    assert len(hubs) == 2
    assert {n.anchor_text for n in hubs} == {"to a", "to b"}


def test_no_parents_gives_level_zero_only():
    rows = [(t, "", "", "", "x", "") for t in TARGETS]
    g = build_tgraph(TARGETS, StaticParentProvider(rows), depth=3)
    assert g.level_counts() == {0: 4} and g.edges == []


def test_fanout_cap():
    rows = [("http://a.org/", "", "", "", "a", "")]
    rows += [("http://a.org/", f"http://p{i}.org/", "", "", "", "") for i in range(9)]
    g = build_tgraph(["http://a.org/"], StaticParentProvider(rows), depth=1, max_parents_per_node=5)
    assert [n.url for n in g.nodes[1:]] == [f"http://p{i}.org/" for i in range(5)]


def test_unresolvable_targets_listed():
    with pytest.raises(TGraphError, match="http://nowhere.org/"):
        build_tgraph(["http://t0.org/", "http://nowhere.org/"], StaticParentProvider(parent_rows()), depth=1)
    with pytest.raises(TGraphError):
        build_tgraph([], StaticParentProvider([]), depth=1)


def test_parent_map_file_and_bodies(tmp_path):
    (tmp_path / "b.html").write_text("<title>x</title><p>Body Words</p>", encoding="utf-8")
    (tmp_path / "p.txt").write_text("plain body", encoding="utf-8")
    (tmp_path / "map.tsv").write_text(
        "# header\nhttp://a.org/\t\t\t\tA\tb.html\nhttp://a.org/\thttp://p.org/\tgo\tnear go\tP\tp.txt\n",
        encoding="utf-8",
    )
    prov = StaticParentProvider.from_tsv(tmp_path / "map.tsv")
    g = build_tgraph(["http://a.org/"], prov, depth=2)
    assert g.nodes[0].body_text == "body words"
    assert (g.nodes[1].anchor_text, g.nodes[1].body_text) == ("go", "plain body")
    with pytest.raises(TGraphError):
        StaticParentProvider([("a", "b")])


def test_corpus_provider_inverts_links():
    pages = {
        "http://a.org/": "<title>A</title><p>grammar text</p>",
        "http://b.org/": '<title>B</title><p>see <a href="http://a.org/">grammar</a> now</p>',
        "http://c.org/": '<title>C</title><ul><li><a href="http://b.org/">b</a></li><li>other</li></ul>',
    }
    docs = [parse_document(html, url) for url, html in pages.items()]
    g = build_tgraph(["http://a.org/"], CorpusParentProvider(docs), depth=3)
    assert [(n.level, n.url) for n in g.nodes] == [(0, "http://a.org/"), (1, "http://b.org/"), (2, "http://c.org/")]
    assert g.nodes[1].anchor_text == "grammar"
    assert g.nodes[1].surrounding_text == "see grammar now"
    assert g.nodes[2].surrounding_text == "b other"


def test_cosine_examples():
    assert text_similarity({"x": 1}, {"x": 1, "y": 1}) == pytest.approx(1 / math.sqrt(2))
    assert text_similarity({"a": 2, "b": 1}, {"a": 2, "b": 1}) == pytest.approx(1.0)
    assert text_similarity({"a": 1}, {"b": 1}) == 0.0
    assert text_similarity({}, {}) == 0.0


def _page():
    doc = parse_document(
        "<title>English grammar</title><p>read <a href=/g>old english</a> texts</p><p>more grammar</p>",
        "http://x.org/",
    )
    return doc, extract_context(doc, doc.links[0])


def test_osm_identity_and_disjoint():
    doc, ctx = _page()
    same = TGraphNode("n0", 1, "http://y/", "old english", "read old english texts", "English grammar",
                      " ".join(doc.body_tokens))
    assert compute_osm(ctx, doc, same) == pytest.approx(1.0)
    other = TGraphNode("n1", 1, "http://y/", "zz", "zz", "zz", "zz")
    assert compute_osm(ctx, doc, other) == 0.0


def test_osm_is_mean_of_components():
    doc, ctx = _page()
    node = TGraphNode("n0", 1, "http://y/", "old", "", "English grammar", "")
    want = (text_similarity({"old": 1, "english": 1}, {"old": 1}) + 0 + 1.0 + 0) / 4
    assert compute_osm(ctx, doc, node) == pytest.approx(want)


def _graph(levels_text):
    """Graph whose node i sits at the given level with the given anchor text."""
    nodes = [TGraphNode("t", 0, "http://t/", title_text="unrelated")]
    edges = []
    last = {0: "t"}
    for i, (level, anchor) in enumerate(levels_text):
        for k in range(1, level):
            if k not in last:
                nid = f"f{k}"
                nodes.append(TGraphNode(nid, k, f"http://f{k}/", anchor_text="qqq"))
                edges.append((last[k - 1], nid))
                last[k] = nid
        nid = f"n{i}"
        nodes.append(TGraphNode(nid, level, f"http://n{i}/", anchor_text=anchor))
        edges.append((last[level - 1], nid))
    return TGraph(nodes, edges, 3)


def test_priority_examples():
    doc, ctx = _page()
    params = OsmParams()
    assert score_link(ctx, doc, _graph([(2, "old english")]), params) == 0.5
    assert score_link(ctx, doc, _graph([(2, "zzz")]), params) == 0.01
    assert score_link(ctx, doc, _graph([(3, "old english"), (1, "english")]), params) == 1.0


def test_threshold_and_clamp():
    doc, ctx = _page()
    g = TGraph([TGraphNode("t", 0, "http://t/", anchor_text="old english")], [], 3)
    assert score_link(ctx, doc, g, OsmParams()) == 1.0  # d=0 clamps to 1
    assert score_link(ctx, doc, g, OsmParams(osm_threshold=0.9)) == 0.01
    with pytest.raises(ValueError):
        OsmParams(osm_threshold=1.5)


WORDS = ["english", "grammar", "old", "poetry", "syntax", "football", "usage", "text"]
phrase = st.lists(st.sampled_from(WORDS), max_size=6).map(" ".join)


@st.composite
def pages_and_graphs(draw):
    paras = draw(st.lists(st.tuples(phrase, phrase, phrase), min_size=1, max_size=4))
    html = "<title>" + draw(phrase) + "</title>" + "".join(
        f"<p>{a} <a href=/l{i}>{b or 'x'}</a> {c}</p>" for i, (a, b, c) in enumerate(paras)
    )
    doc = parse_document(html, "http://x.org/")
    n = draw(st.integers(1, 8))
    nodes = [TGraphNode("n0", 0, "http://t/", *[draw(phrase) for _ in range(4)])]
    edges = []
    for i in range(1, n):
        parent_of = draw(st.integers(0, i - 1))
        nodes.append(TGraphNode(f"n{i}", nodes[parent_of].level + 1, f"http://u{i}/", *[draw(phrase) for _ in range(4)]))
        edges.append((f"n{parent_of}", f"n{i}"))
    return doc, TGraph(nodes, edges, 3)


@settings(max_examples=150, deadline=None)
@given(pages_and_graphs(), st.floats(0.0, 1.0))
def test_batch_scorer_matches_reference(pg, threshold):
    doc, graph = pg
    params = OsmParams(osm_threshold=threshold)
    contexts = [extract_context(doc, l) for l in doc.links]
    want = [score_link(c, doc, graph, params) for c in contexts]
    got = score_links(contexts, doc, graph, params)
    # both sides compare against the threshold; allow float noise only at the edge
    for w, g, c in zip(want, got, contexts):
        if w != g:
            osms = [compute_osm(c, doc, n) for n in graph.nodes]
            assert any(abs(o - threshold) < 1e-9 for o in osms)


@settings(max_examples=100, deadline=None)
@given(pages_and_graphs(), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_priority_laws(pg, t1, t2):
    doc, graph = pg
    lo, hi = sorted((t1, t2))
    for link in doc.links:
        ctx = extract_context(doc, link)
        p_lo = score_link(ctx, doc, graph, OsmParams(lo))
        p_hi = score_link(ctx, doc, graph, OsmParams(hi))
        assert 0.01 <= p_hi <= p_lo <= 1.0
        for node in graph.nodes:
            assert 0.0 <= compute_osm(ctx, doc, node) <= 1.0 + 1e-12


def test_round_trip(tmp_path):
    g = build_tgraph(TARGETS, StaticParentProvider(parent_rows()), depth=3)
    path = tmp_path / "g.json"
    save_tgraph(g, path)
    back = load_tgraph(path)
    assert back == g
    assert [n.vectors for n in back.nodes] == [n.vectors for n in g.nodes]


def test_load_errors(tmp_path):
    with pytest.raises(TGraphError, match="no such file"):
        load_tgraph(tmp_path / "missing.json")
    g = build_tgraph(TARGETS, StaticParentProvider(parent_rows()), depth=1)
    path = tmp_path / "g.json"
    save_tgraph(g, path)
    text = path.read_text()
    path.write_text(text[: len(text) // 2])
    with pytest.raises(TGraphError):
        load_tgraph(path)
    path.write_text(text.replace('"version": 1', '"version": 99'))
    with pytest.raises(TGraphError):
        load_tgraph(path)
    path.write_text('{"version": 1, "depth": 3, "nodes": [], "edges": [["a", "b"]]}')
    with pytest.raises(TGraphError):
        load_tgraph(path)


def _watch_graph():
    return TGraph([TGraphNode("n0", 0, "http://t/", title_text="english grammar", body_text="english grammar usage")], [], 3)


def _docs(n):
    return [
        parse_document(f"<title>english grammar</title><p>english grammar usage</p>", f"http://d{i}.org/")
        for i in range(n)
    ]


def test_watchdog_gate_and_cap():
    g = _watch_graph()
    assert watchdog_update(g, _docs(3), WatchdogParams(enabled=False)) is g
    one = watchdog_update(g, _docs(1), WatchdogParams(enabled=True))
    assert len(one.nodes) == 2 and one.nodes[1].level == 1 and one.edges == [("n0", one.nodes[1].id)]
    many = watchdog_update(g, _docs(25), WatchdogParams(enabled=True, max_nodes=20))
    assert len(many.nodes) == 21
    assert len(g.nodes) == 1  # input untouched
    unrelated = parse_document("<title>football</title><p>tennis</p>", "http://z.org/")
    assert watchdog_update(g, [unrelated], WatchdogParams(enabled=True)) is g
    assert len(watchdog_update(g, _docs(5), WatchdogParams(enabled=True), already_added=18).nodes) == 3
