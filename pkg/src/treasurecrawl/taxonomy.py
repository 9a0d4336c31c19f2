"""Dewey Decimal taxonomy: D-numbers, TSV loading and phrase-first term lookup."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .text import stem_token, tokenize

__all__ = [
    "DNumber",
    "Taxonomy",
    "TaxonomyEntry",
    "TaxonomyError",
    "TopicProfile",
    "default_profile",
    "default_taxonomy",
    "load_profile",
    "load_taxonomy",
    "lookup_terms",
    "stem_token",
    "truncate_code",
]

_CODE_RE = re.compile(r"[0-9]+(\.[0-9]+)?")
MAX_CODE_DIGITS = 9


class TaxonomyError(ValueError):
    """Raised when a taxonomy or profile file cannot be loaded."""


@dataclass(frozen=True, order=True)
class DNumber:
    """A Dewey code as written in the source table, e.g. ``"155.95"``."""

    digits: str

    def __post_init__(self) -> None:
        if not _CODE_RE.fullmatch(self.digits):
            raise TaxonomyError(f"invalid D-number {self.digits!r}")
        if self.digit_count > MAX_CODE_DIGITS:
            raise TaxonomyError(f"D-number {self.digits!r} has more than {MAX_CODE_DIGITS} digits")

    @property
    def digit_count(self) -> int:
        return len(self.digits) - self.digits.count(".")

    def truncated(self, max_len: int) -> str:
        return truncate_code(self.digits, max_len)

    def __str__(self) -> str:
        return self.digits


def truncate_code(code: DNumber | str, max_len: int) -> str:
    """Drop the decimal part of ``code`` and keep at most ``max_len`` digits."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    digits = code.digits if isinstance(code, DNumber) else code
    return digits.split(".", 1)[0][:max_len]


@dataclass(frozen=True)
class TaxonomyEntry:
    code: DNumber
    label: str
    # stemmed, space-joined terms
    terms: tuple[str, ...]
    # lower-cased surface forms, kept for corpus synthesis
    source_terms: tuple[str, ...] = ()


@dataclass
class Taxonomy:
    entries: list[TaxonomyEntry]
    term_index: dict[str, frozenset[DNumber]]
    max_phrase_len: int

    @classmethod
    def from_entries(cls, entries: Iterable[TaxonomyEntry]) -> "Taxonomy":
        entries = list(entries)
        index: dict[str, set[DNumber]] = {}
        longest = 1
        for entry in entries:
            for term in entry.terms:
                index.setdefault(term, set()).add(entry.code)
                longest = max(longest, term.count(" ") + 1)
        return cls(
            entries=entries,
            term_index={t: frozenset(c) for t, c in index.items()},
            max_phrase_len=longest,
        )

    def codes(self) -> set[DNumber]:
        return {e.code for e in self.entries}

    def lookup(self, tokens: Sequence[str]) -> list[tuple[int, frozenset[DNumber]]]:
        return lookup_terms(tokens, self)


def _stem_phrase(phrase: str) -> str:
    return " ".join(stem_token(t) for t in tokenize(phrase))


def parse_taxonomy(text: str, source: str = "<string>") -> Taxonomy:
    entries: list[TaxonomyEntry] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise TaxonomyError(f"{source}:{lineno}: expected 3 tab-separated columns, got {len(cols)}")
        code_text, label, terms_text = (c.strip() for c in cols)
        try:
            code = DNumber(code_text)
        except TaxonomyError as exc:
            raise TaxonomyError(f"{source}:{lineno}: {exc}") from None
        surface: list[str] = []
        stemmed: list[str] = []
        for term in terms_text.split(","):
            key = _stem_phrase(term)
            if not key:
                continue
            if key not in stemmed:
                stemmed.append(key)
                surface.append(" ".join(tokenize(term)))
        entries.append(TaxonomyEntry(code, label, tuple(stemmed), tuple(surface)))
    if not entries:
        raise TaxonomyError("empty taxonomy")
    return Taxonomy.from_entries(entries)


def load_taxonomy(path: str | Path) -> Taxonomy:
    """Load a ``code<TAB>label<TAB>term,term,...`` table.

    Terms are tokenized, lower-cased and Porter-stemmed at load time so that
    lookups compare stems with stems. Duplicate (term, code) pairs collapse.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise TaxonomyError(f"no such file: {path}") from None
    return parse_taxonomy(text, source=str(path))


def lookup_terms(tokens: Sequence[str], taxonomy: Taxonomy) -> list[tuple[int, frozenset[DNumber]]]:
    """Greedy longest-phrase-first scan of ``tokens``.

    Returns ``(position, codes)`` per hit, where ``position`` is the index of
    the hit's first token. Words consumed by a phrase are not matched again.
    """
    stems = [stem_token(t) for t in tokens]
    index = taxonomy.term_index
    hits: list[tuple[int, frozenset[DNumber]]] = []
    i = 0
    n = len(stems)
    while i < n:
        for width in range(min(taxonomy.max_phrase_len, n - i), 0, -1):
            codes = index.get(" ".join(stems[i : i + width]))
            if codes:
                hits.append((i, codes))
                i += width
                break
        else:
            i += 1
    return hits


@dataclass(frozen=True)
class TopicProfile:
    """The truncated codes a crawler specializes in."""

    codes: frozenset[str]
    labels: dict[str, str] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self) -> None:
        if not self.codes:
            raise TaxonomyError("topic profile is empty")

    @classmethod
    def from_codes(cls, codes: Iterable[DNumber | str], max_len: int = 3) -> "TopicProfile":
        return cls(frozenset(truncate_code(c if isinstance(c, DNumber) else DNumber(c), max_len) for c in codes))


def parse_profile(text: str, max_len: int = 3, source: str = "<string>") -> TopicProfile:
    codes: set[str] = set()
    labels: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        code_text, _, label = line.partition("\t")
        try:
            code = truncate_code(DNumber(code_text.strip()), max_len)
        except TaxonomyError as exc:
            raise TaxonomyError(f"{source}:{lineno}: {exc}") from None
        codes.add(code)
        labels.setdefault(code, label.strip())
    if not codes:
        raise TaxonomyError(f"{source}: topic profile is empty")
    return TopicProfile(frozenset(codes), labels)


def load_profile(path: str | Path, max_len: int = 3) -> TopicProfile:
    """Profile file: one code per line, optionally followed by a tab and a label."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise TaxonomyError(f"no such file: {path}") from None
    return parse_profile(text, max_len, source=str(path))


def _data_text(name: str) -> str:
    return resources.files("treasurecrawl").joinpath("data").joinpath(name).read_text(encoding="utf-8")


def default_taxonomy() -> Taxonomy:
    """Bundled seed table: the English-language classes plus a spread of unrelated ones."""
    return parse_taxonomy(_data_text("ddc_seed.tsv"), source="ddc_seed.tsv")


def default_profile(max_len: int = 3) -> TopicProfile:
    """The twenty English language and grammar classes."""
    return parse_profile(_data_text("profile_english.tsv"), max_len, source="profile_english.tsv")
