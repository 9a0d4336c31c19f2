import pytest
from hypothesis import given, settings, strategies as st

from treasurecrawl.pagemodel import Container, Link, NormalizationError, extract_context, normalize_url, parse_document

BASE = "http://x.org/"


def test_minimal_paragraph_link():
    doc = parse_document(b'<p>learn <a href="/g">grammar</a> here</p>', BASE)
    assert len(doc.links) == 1
    link = doc.links[0]
    assert link.target == "http://x.org/g"
    assert link.anchor_tokens == ("grammar",)
    assert link.container is Container.PARAGRAPH
    ctx = extract_context(doc, link)
    assert [(t.position, t.text, t.is_anchor) for t in ctx.tokens] == [
        (0, "learn", False),
        (1, "grammar", True),
        (2, "here", False),
    ]
    assert ctx.boundary_kind == "paragraph"


def test_list_item_context_covers_all_items():
    doc = parse_document(b"<ul><li><a href=a>A</a> one</li><li>b two</li><li>c three</li></ul><p>after</p>", BASE)
    link = doc.links[0]
    assert link.container is Container.LIST_ITEM
    ctx = extract_context(doc, link)
    assert ctx.texts == ["a", "one", "b", "two", "c", "three"]
    assert ctx.anchor_texts == ["a"]
    assert ctx.boundary_kind == "list_items"


def test_separate_lists_are_separate_groups():
    doc = parse_document(b"<ul><li><a href=a>x</a></li></ul><ul><li>y</li></ul>", BASE)
    assert extract_context(doc, doc.links[0]).texts == ["x"]


def test_truncated_tag_soup():
    doc = parse_document(b"<p>text <a href=", BASE)
    assert doc.links == []
    assert doc.body_tokens == ["text"]


def test_anchor_only_paragraph():
    doc = parse_document(b'<p><a href="/x">x</a></p>', BASE)
    ctx = extract_context(doc, doc.links[0])
    assert [(t.text, t.is_anchor) for t in ctx.tokens] == [("x", True)]


def test_paragraph_boundaries_stop_context():
    doc = parse_document(b"<p>alpha beta</p><p>gamma <a href=/z>delta</a></p><p>eps</p>", BASE)
    assert extract_context(doc, doc.links[0]).texts == ["gamma", "delta"]


def test_unclosed_paragraphs_close_implicitly():
    doc = parse_document(b"<p>one <a href=/a>two</a><p>three", BASE)
    assert extract_context(doc, doc.links[0]).texts == ["one", "two"]


def test_window_for_links_outside_blocks():
    words = " ".join(f"w{i}" for i in range(100))
    html = f"<body>{words} <a href=/t>anchor</a> {words}</body>"
    doc = parse_document(html, BASE, context_window=5)
    ctx = extract_context(doc, doc.links[0])
    assert ctx.boundary_kind == "document"
    assert ctx.texts == [f"w{i}" for i in range(95, 100)] + ["anchor"] + [f"w{i}" for i in range(5)]


def test_title_script_and_style_excluded():
    doc = parse_document(
        b"<html><head><title>My Page</title><style>p{x:y}</style></head>"
        b"<body><script>var a = 1;</script><p>Visible TEXT</p></body></html>",
        BASE,
    )
    assert doc.title == "My Page"
    assert doc.title_tokens == ["my", "page"]
    assert doc.body_tokens == ["visible", "text"]


def test_dropped_links_counted():
    html = (
        b'<p><a href="mailto:a@b.c">m</a> <a href="ftp://h/x">f</a> <a rel="nofollow" href="/n">n</a>'
        b' <a href="http://[bad">b</a> <a href="/ok">ok</a> <a name="x">no href</a></p>'
    )
    doc = parse_document(html, BASE)
    assert [l.target for l in doc.links] == ["http://x.org/ok"]
    assert doc.dropped_links == 4


def test_base_href_and_image_links():
    doc = parse_document(b'<base href="http://other.net/dir/"><p><a href="p.html"><img src=i></a></p>', BASE)
    assert doc.links[0].target == "http://other.net/dir/p.html"
    assert doc.links[0].anchor_tokens == ()


def test_undecodable_bytes_and_empty_input():
    doc = parse_document(b"<p>caf\xff\xfe</p>", BASE)
    assert doc.body_tokens == ["caf"]
    empty = parse_document(b"", BASE)
    assert empty.body_tokens == [] and empty.links == [] and empty.title == ""


def test_foreign_link_rejected():
    doc = parse_document(b"<p><a href=/a>a</a></p>", BASE)
    stranger = Link("http://x.org/b", ("b",), Container.PARAGRAPH, 0)
    with pytest.raises(ValueError):
        extract_context(doc, stranger)


# RFC 3986 section 5.4 reference resolution, restricted to http and with
# fragments removed
RFC_BASE = "http://a/b/c/d;p?q"
RFC_CASES = {
    "g": "http://a/b/c/g",
    "./g": "http://a/b/c/g",
    "g/": "http://a/b/c/g/",
    "/g": "http://a/g",
    "//g": "http://g/",
    "?y": "http://a/b/c/d;p?y",
    "g?y": "http://a/b/c/g?y",
    "#s": "http://a/b/c/d;p?q",
    "g#s": "http://a/b/c/g",
    ";x": "http://a/b/c/;x",
    "g;x?y#s": "http://a/b/c/g;x?y",
    "": "http://a/b/c/d;p?q",
    ".": "http://a/b/c/",
    "./": "http://a/b/c/",
    "..": "http://a/b/",
    "../g": "http://a/b/g",
    "../..": "http://a/",
    "../../g": "http://a/g",
    "../../../g": "http://a/g",
    "../../../../g": "http://a/g",
    "/./g": "http://a/g",
    "/../g": "http://a/g",
    "g.": "http://a/b/c/g.",
    ".g": "http://a/b/c/.g",
    "g..": "http://a/b/c/g..",
    "..g": "http://a/b/c/..g",
    "./../g": "http://a/b/g",
    "./g/.": "http://a/b/c/g/",
    "g/./h": "http://a/b/c/g/h",
    "g/../h": "http://a/b/c/h",
    "g;x=1/./y": "http://a/b/c/g;x=1/y",
    "g;x=1/../y": "http://a/b/c/y",
    "g?y/./x": "http://a/b/c/g?y/./x",
    "g?y/../x": "http://a/b/c/g?y/../x",
}


@pytest.mark.parametrize("ref,expected", sorted(RFC_CASES.items()))
def test_rfc3986_resolution(ref, expected):
    assert normalize_url(ref, RFC_BASE) == expected


def test_normalization_examples():
    assert normalize_url("../b", "http://ex.com/a/c") == "http://ex.com/b"
    assert normalize_url("HTTP://Ex.com:80/p#frag", "http://base/") == "http://ex.com/p"
    assert normalize_url("", "http://ex.com/p") == "http://ex.com/p"
    assert normalize_url("https://EX.com:443", "http://b/") == "https://ex.com/"
    assert normalize_url("http://ex.com:8080/a", "http://b/") == "http://ex.com:8080/a"


@pytest.mark.parametrize("raw", ["mailto:a@b.c", "javascript:void(0)", "http://[::1", "https://", "ftp://h/x"])
def test_normalization_errors(raw):
    with pytest.raises(NormalizationError):
        normalize_url(raw, "http://ex.com/")


@settings(max_examples=300, deadline=None)
@given(st.binary(max_size=400))
def test_parse_never_raises_on_bytes(data):
    parse_document(data, BASE)


TAGS = ["<p>", "</p>", "<ul>", "</ul>", "<li>", "</li>", "<div>", "</div>", "<a href=/x>", "<a href='y z'>", "</a>",
        "<script>", "</script>", "<br>", "<table><td>", "word", "Other Words", "&amp;", "<!--", "-->", "<", ">"]


@settings(max_examples=300, deadline=None)
@given(st.lists(st.sampled_from(TAGS), max_size=40))
def test_tag_soup_contexts_are_consistent(parts):
    doc = parse_document(" ".join(parts), BASE)
    for link in doc.links:
        assert normalize_url(link.target, doc.url) == link.target
        assert 0 <= link.start <= link.end <= len(doc.body_tokens)
        ctx = extract_context(doc, link)
        positions = [t.position for t in ctx.tokens]
        assert positions == sorted(set(positions))
        assert ctx.anchor_texts == list(link.anchor_tokens)
