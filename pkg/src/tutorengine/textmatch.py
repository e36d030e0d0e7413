"""Text normalization and the two-channel short-answer assessor.

Responses are scored on two channels: cosine similarity between term
vectors, and keyword matching with an edit-distance tolerance for typos.
The final assessment is the maximum of the two channel scores.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Mapping, Sequence

from .errors import EmptyExpectation, EmptyKeywordList

_NON_ALNUM = re.compile(r"[^a-z0-9]+")

# Keywords shorter than this must match exactly; longer ones tolerate a
# single edit, so a typo doesn't zero out a content word.
FUZZY_MIN_KEYWORD_LEN = 5


def normalize_token(raw: str) -> str:
    """Lowercase and drop every character that is not a letter or digit."""
    return _NON_ALNUM.sub("", raw.lower())


def normalize_text(text: str) -> str:
    """Lowercase, replace punctuation runs with single spaces, collapse."""
    return " ".join(_NON_ALNUM.sub(" ", text.lower()).split())


@lru_cache(maxsize=1)
def _bundled_stopwords() -> frozenset[str]:
    data = resources.files("tutorengine.resources").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(w.strip() for w in data.splitlines() if w.strip() and not w.startswith("#"))


_stopword_override: frozenset[str] | None = None


def load_stopword_file(path) -> frozenset[str]:
    from pathlib import Path
    data = Path(path).read_text("utf-8")
    return frozenset(w.strip() for w in data.splitlines()
                     if w.strip() and not w.startswith("#"))


def set_default_stopwords(source) -> None:
    """Override the bundled stopword list (path or iterable; None resets)."""
    global _stopword_override
    if source is None:
        _stopword_override = None
    elif isinstance(source, (str, bytes)) or hasattr(source, "read_text"):
        _stopword_override = load_stopword_file(source)
    else:
        _stopword_override = frozenset(source)


def default_stopwords() -> frozenset[str]:
    return _stopword_override if _stopword_override is not None else _bundled_stopwords()


@dataclass(frozen=True)
class Token:
    surface: str
    normalized: str
    is_stopword: bool


def tokenize(text: str, stopwords: frozenset[str] | None = None) -> list[Token]:
    """Whitespace tokenization; tokens that normalize to "" are dropped."""
    sw = default_stopwords() if stopwords is None else stopwords
    out = []
    for chunk in text.split():
        norm = normalize_token(chunk)
        if norm:
            out.append(Token(surface=chunk, normalized=norm, is_stopword=norm in sw))
    return out


def content_terms(text: str) -> list[str]:
    return [t.normalized for t in tokenize(text) if not t.is_stopword]


def term_vector(text: str) -> dict[str, float]:
    """Raw counts over non-stopword normalized tokens."""
    return dict(Counter(content_terms(text)))


def cosine(a: Mapping[str, float], b: Mapping[str, float]) -> float:
    """Cosine over sparse non-negative vectors; 0.0 if either is empty."""
    if not a or not b:
        return 0.0
    dot = sum(w * b.get(term, 0.0) for term, w in a.items())
    norm_a = math.sqrt(sum(w * w for w in a.values()))
    norm_b = math.sqrt(sum(w * w for w in b.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return min(1.0, dot / (norm_a * norm_b))


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance, unit-cost insert/delete/substitute."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def _matches_keyword(token_norm: str, keyword_norm: str) -> bool:
    if token_norm == keyword_norm:
        return True
    if len(keyword_norm) < FUZZY_MIN_KEYWORD_LEN:
        return False
    return edit_distance(token_norm, keyword_norm) <= 1


def keyword_match_score(tokens: Sequence[Token], keywords: Sequence[str]) -> float:
    """Fraction of keywords matched by some non-stopword response token."""
    if not keywords:
        raise EmptyKeywordList("keyword list must be non-empty")
    content = [t.normalized for t in tokens if not t.is_stopword]
    matched = sum(
        1
        for kw in keywords
        if any(_matches_keyword(tok, normalize_token(kw)) for tok in content)
    )
    return matched / len(keywords)


@dataclass(frozen=True)
class AssessmentScore:
    value: float
    cosine_component: float
    keyword_component: float


def assess(response: str, answer_text: str, keywords: Sequence[str] = ()) -> AssessmentScore:
    """Score a free-text response against an expected answer.

    The cosine channel compares term vectors over non-stopword terms; the
    keyword channel is keyword_match_score. An empty keyword list scores
    0.0 on that channel instead of raising, so expectations without
    keyword annotations can still be assessed on the cosine channel.
    """
    if not answer_text or not answer_text.strip():
        raise EmptyExpectation("expected answer text must be non-empty")
    cos = cosine(term_vector(response), term_vector(answer_text))
    kw = keyword_match_score(tokenize(response), keywords) if keywords else 0.0
    return AssessmentScore(value=max(cos, kw), cosine_component=cos, keyword_component=kw)
