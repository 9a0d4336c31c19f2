"""Tokenization shared by the page model, taxonomy and T-Graph."""

from __future__ import annotations

import re
from collections import Counter
from functools import lru_cache
from typing import Iterable

from .porter import stem

# Unicode letters and digits; underscore counts as a separator.
_TOKEN_RE = re.compile(r"[^\W_]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@lru_cache(maxsize=65536)
def stem_token(word: str) -> str:
    """Lower-case ``word`` and return its Porter stem."""
    return stem(word.lower())


def term_vector(tokens: Iterable[str]) -> Counter:
    """Stemmed term-frequency vector of already tokenized text."""
    return Counter(stem_token(t) for t in tokens)
