"""Rule-ensemble speech act classification.

Three deterministic voters each label the utterance; the plurality wins,
with ties broken by a fixed priority so the highest-stakes reading
(a metacognitive complaint) is never lost to a coin flip. Confidence is
the fraction of agreeing voters: 1/3, 2/3, or 1.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources

from .textmatch import tokenize


class ActKind(str, Enum):
    ANSWER = "Answer"
    METACOGNITIVE_DEFICIT = "MetacognitiveDeficit"
    REPEAT_REQUEST = "RepeatRequest"
    CLARIFICATION_QUESTION = "ClarificationQuestion"
    AFFIRMATION = "Affirmation"
    NEGATION = "Negation"
    OTHER = "Other"


# Highest first; used to settle 1-1-1 splits.
TIE_PRIORITY = (
    ActKind.METACOGNITIVE_DEFICIT,
    ActKind.REPEAT_REQUEST,
    ActKind.CLARIFICATION_QUESTION,
    ActKind.NEGATION,
    ActKind.AFFIRMATION,
    ActKind.ANSWER,
    ActKind.OTHER,
)

INITIATIVE_KINDS = {
    ActKind.METACOGNITIVE_DEFICIT,
    ActKind.REPEAT_REQUEST,
    ActKind.CLARIFICATION_QUESTION,
    ActKind.OTHER,
}


@dataclass(frozen=True)
class SpeechAct:
    kind: ActKind
    confidence: float


@lru_cache(maxsize=1)
def load_patterns() -> tuple[tuple[ActKind, re.Pattern], ...]:
    raw = resources.files("tutorengine.resources").joinpath("speech_acts.txt").read_text("utf-8")
    rules = []
    for line in raw.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        kind, _, pattern = line.partition("\t")
        rules.append((ActKind(kind), re.compile(pattern)))
    return tuple(rules)


# First-token cue sets for the cue-word voter.
ASSENT_FIRST = {"yes", "yeah", "yep", "yup", "ok", "okay", "sure", "right",
                "correct", "true", "definitely", "absolutely"}
DISSENT_FIRST = {"no", "nope", "nah", "never", "false", "incorrect", "wrong"}
REPEAT_FIRST = {"repeat", "again"}
WH_FIRST = {"what", "why", "how", "when", "where", "who", "which", "whats"}
AUX_FIRST = {"is", "are", "do", "does", "did", "can", "could", "would", "will",
             "was", "were"}

# Content cue lexicons for the content voter.
DEFICIT_CONTENT = {"understand", "understood", "understanding", "confused",
                   "confusing", "lost", "stuck", "idea", "clue", "hard",
                   "difficult", "forgot", "forget", "get", "follow"}
REPEAT_CONTENT = {"repeat", "repeating", "rephrase", "say", "time"}
CLARIFY_CONTENT = {"mean", "meaning", "explain", "clarify"}
ASSENT_CONTENT = {"agree", "agreed", "sense"}
DISSENT_CONTENT = {"disagree", "wrong", "incorrect", "false"}


def _pattern_vote(normalized: str, has_tokens: bool) -> ActKind:
    for kind, pattern in load_patterns():
        if pattern.search(normalized):
            return kind
    return ActKind.ANSWER if has_tokens else ActKind.OTHER


def _first_token_vote(tokens) -> ActKind:
    if not tokens:
        return ActKind.OTHER
    first = tokens[0].normalized
    if first in DISSENT_FIRST:
        return ActKind.NEGATION
    if first in ASSENT_FIRST:
        return ActKind.AFFIRMATION
    if first in REPEAT_FIRST:
        return ActKind.REPEAT_REQUEST
    if first in WH_FIRST or first in AUX_FIRST:
        return ActKind.CLARIFICATION_QUESTION
    return ActKind.ANSWER


def _content_vote(tokens) -> ActKind:
    if not tokens:
        return ActKind.OTHER
    content = [t.normalized for t in tokens if not t.is_stopword]
    if not content:
        surfaces = {t.normalized for t in tokens}
        if surfaces & ASSENT_FIRST:
            return ActKind.AFFIRMATION
        if surfaces & DISSENT_FIRST:
            return ActKind.NEGATION
        return ActKind.OTHER
    terms = set(content)
    if terms & DEFICIT_CONTENT:
        return ActKind.METACOGNITIVE_DEFICIT
    if terms & REPEAT_CONTENT:
        return ActKind.REPEAT_REQUEST
    if terms & CLARIFY_CONTENT:
        return ActKind.CLARIFICATION_QUESTION
    if terms & ASSENT_CONTENT:
        return ActKind.AFFIRMATION
    if terms & DISSENT_CONTENT:
        return ActKind.NEGATION
    return ActKind.ANSWER


def normalized_for_patterns(utterance: str) -> str:
    """Token-normalized form the pattern rules match against.

    Contractions collapse ("don't" -> "dont"), punctuation is stripped,
    whitespace is a single space.
    """
    return " ".join(t.normalized for t in tokenize(utterance))


def classify(utterance: str) -> SpeechAct:
    """Classify one student utterance; total and deterministic."""
    tokens = tokenize(utterance)
    normalized = " ".join(t.normalized for t in tokens)
    votes = [
        _pattern_vote(normalized, bool(tokens)),
        _first_token_vote(tokens),
        _content_vote(tokens),
    ]
    counts: dict[ActKind, int] = {}
    for v in votes:
        counts[v] = counts.get(v, 0) + 1
    best = max(counts.values())
    leaders = [k for k, n in counts.items() if n == best]
    if len(leaders) == 1:
        winner = leaders[0]
    else:
        winner = next(k for k in TIE_PRIORITY if k in leaders)
    return SpeechAct(kind=winner, confidence=counts[winner] / 3.0)
