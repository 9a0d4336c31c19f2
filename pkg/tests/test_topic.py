import pytest
from hypothesis import given, settings, strategies as st

from treasurecrawl.pagemodel import parse_document, extract_context
from treasurecrawl.taxonomy import TopicProfile, default_profile, parse_taxonomy
from treasurecrawl.topic import (
    DetectorParams,
    PointCloud,
    classify_cloud,
    classify_link,
    classify_page,
    detect_galaxy,
    make_point,
    match_profile,
    plot_points,
)

from oracles import galaxy_oracle

P = DetectorParams()
TAX = parse_taxonomy(
    "155.95\tclothing psychology\tclothing\n"
    "391\tcostume\tclothing,costume\n"
    "746.92\tcostume design\tclothing\n"
    "420\tEnglish\tenglish,old english\n"
    "425\tGrammar\tgrammar,syntax\n"
    "428\tStandard usage\tusage\n"
    "796\tSports\tfootball,tennis\n"
)
PROFILE = default_profile()


def cloud(*specs):
    return PointCloud(tuple(make_point(i, code, anchor, P) for i, (code, anchor) in enumerate(specs)))


def ctx_for(html):
    doc = parse_document(html, "http://x.org/")
    return extract_context(doc, doc.links[0]), doc


def test_anchor_point_weight():
    ctx, _ = ctx_for("<p><a href=/e>english</a></p>")
    pts = plot_points(ctx, TAX, P).points
    assert len(pts) == 1
    assert pts[0].code == "420" and pts[0].weight == pytest.approx(1.4)


def test_clothing_points():
    ctx, _ = ctx_for("<p>clothing <a href=/e>here</a></p>")
    pts = plot_points(ctx, TAX, P).points
    assert sorted(p.code for p in pts) == ["155", "391", "746"]
    assert all(p.weight == 1.0 and p.full_len == 3 for p in pts)


def test_empty_cloud():
    ctx, _ = ctx_for("<p><a href=/e>nothing known</a></p>")
    c = plot_points(ctx, TAX, P)
    assert len(c) == 0 and c.total_weight == 0
    assert detect_galaxy(c, P) is None


def test_short_codes_weigh_less():
    p = make_point(0, "42", False, P)
    assert p.full_len == 2 and p.weight == pytest.approx(2 / 3)
    q = make_point(0, "420", True, P, full_len=5)
    assert q.full_len == 3


def test_worked_galaxy_example():
    g = detect_galaxy(cloud(("420", True), ("420", False), ("425", False), ("391", False)), P)
    assert g.prefix == "420"
    assert g.score == pytest.approx(2.4, abs=1e-12)
    assert (g.support, g.anchor_support) == (2, 1)


def test_single_point():
    g = detect_galaxy(cloud(("391", False)), P)
    assert (g.prefix, g.score, g.support) == ("391", 1.0, 1)


def test_tie_breaks():
    # "42" scores 3 * 2/3 = 2.0 against 1.0 for each full code
    g = detect_galaxy(cloud(("420", False), ("425", False), ("426", False)), P)
    assert g.prefix == "42"
    # with two-digit codes "4" and "55" both score 2.0; longer beats smaller
    p2 = DetectorParams(max_dnumber_length=2)
    pts = [make_point(i, c, False, p2) for i, c in enumerate(["41", "42", "43", "44", "55", "55"])]
    assert detect_galaxy(pts, p2).prefix == "55"
    g = detect_galaxy(cloud(("420", False), ("391", True)), DetectorParams(anchor_impact=1.0))
    assert g.prefix == "391"  # tie on score and length, anchor support decides
    g = detect_galaxy(cloud(("420", False), ("391", False)), P)
    assert g.prefix == "391"  # full tie, smaller prefix


codes = st.sampled_from(["4", "42", "420", "425", "428", "3", "39", "391", "796", "155", "7", "74", "746"])


@st.composite
def clouds(draw):
    specs = draw(st.lists(st.tuples(codes, st.booleans()), max_size=25))
    return cloud(*specs)


@settings(max_examples=200, deadline=None)
@given(clouds())
def test_matches_enumeration_oracle(c):
    got = detect_galaxy(c, P)
    want = galaxy_oracle([(p.code, p.weight, p.is_anchor) for p in c.points], P.max_dnumber_length)
    if want is None:
        assert got is None
    else:
        assert (got.prefix, got.support, got.anchor_support) == (want[0], want[2], want[3])
        assert abs(got.score - want[1]) <= 1e-12


@given(clouds(), st.floats(0.1, 10))
def test_argmax_scale_invariance(c, k):
    g = detect_galaxy(c, P)
    scaled = PointCloud(tuple(type(p)(p.position, p.code, p.full_len, p.is_anchor, p.weight * k) for p in c.points))
    h = detect_galaxy(scaled, P)
    # exact float ties may resolve differently after scaling; compare when clear
    if g is not None:
        assert h is not None and h.score == pytest.approx(g.score * k)


@given(clouds(), st.data())
def test_anchor_monotonicity(c, data):
    if not c.points:
        return
    i = data.draw(st.integers(0, len(c.points) - 1))
    flipped = list(c.points)
    p = flipped[i]
    flipped[i] = make_point(p.position, p.code, True, P, p.full_len)
    for k in range(1, len(p.code) + 1):
        q = p.code[:k]
        before = sum(x.weight for x in c.points if x.code.startswith(q))
        after = sum(x.weight for x in flipped if x.code.startswith(q))
        assert after >= before


def test_classification_against_profile():
    assert classify_cloud(cloud(("420", False)), PROFILE, P).matched_code == "420"
    assert classify_cloud(cloud(("391", False)), PROFILE, P).on_topic is False
    d = classify_cloud(cloud(("420", False), ("425", False), ("428", False)), PROFILE, P)
    assert d.galaxy.prefix == "42" and d.on_topic
    assert d.matched_code == "420"


def test_match_profile_rules():
    prof = TopicProfile.from_codes(["420", "425", "4"])
    assert match_profile("42", prof) == "420"
    assert match_profile("425", prof) == "425"
    assert match_profile("430", prof) == "4"
    assert match_profile("5", prof) is None


def test_classify_link_end_to_end():
    ctx, _ = ctx_for("<p>notes on <a href=/g>english grammar</a> and usage</p>")
    d = classify_link(ctx, TAX, PROFILE, P)
    assert d.on_topic and d.galaxy.prefix.startswith("42")
    ctx, _ = ctx_for("<p>football <a href=/g>tennis</a> football</p>")
    assert not classify_link(ctx, TAX, PROFILE, P).on_topic


def test_classify_page():
    doc = parse_document("<p>" + "english grammar usage " * 4 + "</p>", "http://x.org/")
    assert classify_page(doc, TAX, PROFILE, P).on_topic
    doc = parse_document("<p>nothing to see</p>", "http://x.org/")
    d = classify_page(doc, TAX, PROFILE, P)
    assert not d.on_topic and d.galaxy is None
    doc = parse_document("<p>" + "football " * 10 + "english</p>", "http://x.org/")
    d = classify_page(doc, TAX, PROFILE, P)
    assert not d.on_topic and d.galaxy.prefix == "796"


def test_title_counts_as_anchor():
    doc = parse_document("<title>Tennis</title><p>english</p>", "http://x.org/")
    d = classify_page(doc, TAX, PROFILE, P)
    assert d.galaxy.prefix == "796" and d.galaxy.anchor_support == 1


def test_params_validation():
    with pytest.raises(ValueError):
        DetectorParams(anchor_impact=0)
    with pytest.raises(ValueError):
        DetectorParams(max_dnumber_length=0)
