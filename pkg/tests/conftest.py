from pathlib import Path

import pytest

from treasurecrawl.corpus import CorpusSpec, write_corpus

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def porter_pairs():
    voc = [w for w in (DATA / "porter_voc.txt").read_text().splitlines() if w]
    out = [w for w in (DATA / "porter_output.txt").read_text().splitlines() if w]
    assert len(voc) == len(out)
    return list(zip(voc, out))


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """Two 40-page clusters joined by a 3-page bridge, 120 pages in all."""
    out = tmp_path_factory.mktemp("corpus_small")
    spec = CorpusSpec(total_pages=120, cluster_count=2, cluster_size=40, bridge_length=3, rng_seed=7)
    corpus = write_corpus(spec, out)
    return out, corpus


def write_site(root: Path, pages: dict, statuses: dict | None = None) -> Path:
    """Write ``{url: html}`` as a corpus manifest under ``root``; returns the manifest path."""
    import json

    statuses = statuses or {}
    root.mkdir(parents=True, exist_ok=True)
    lines = []
    for i, (url, html) in enumerate(pages.items()):
        (root / f"p{i}.html").write_text(html, encoding="utf-8")
        lines.append(json.dumps({"url": url, "path": f"p{i}.html", "status": statuses.get(url, 200)}))
    manifest = root / "manifest.jsonl"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda l: int(l.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
