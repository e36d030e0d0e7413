"""Summary grading, skeleton concept maps, and cloze tasks.

The summary decides how much remediation a session gets: covering a
third or less of the topic's concepts schedules two rounds of maps and
scaffolding instead of one, and whatever the summary covers is presumed
understood and never taught again. Concept maps are recognition tasks,
so their grading never feeds the student model; cloze responses are
recall and do.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field

from .config import DEFAULT_CONFIG, EngineConfig
from .curriculum import Concept, ConceptTriple, IdealSummary, Topic
from .errors import BlankAlreadyFilled, NoSpans, SlotAlreadyFilled, UnknownBlank, UnknownSlot
from .textmatch import AssessmentScore, assess, edit_distance, normalize_text

logger = logging.getLogger(__name__)

MAX_TRIPLES_PER_MAP = 4
BLANK_MARKER = "____"
# Accepted answers tolerate one edit only for labels at least this long.
FUZZY_MIN_ANSWER_LEN = 5


# ---------------------------------------------------------------------------
# Student summary
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SummaryResult:
    covered_concept_ids: frozenset[str]
    ratio: float
    rounds: int
    scores: dict[str, float] = field(default_factory=dict, compare=False)


def rounds_for_ratio(ratio: float, config: EngineConfig = DEFAULT_CONFIG) -> int:
    """Two rounds when the summary covers a third or less of the concepts."""
    return 2 if ratio <= config.two_round_ratio else 1


def grade_summary(
    summary: str,
    topic: Topic,
    presumed_covered: frozenset[str] | set[str] = frozenset(),
    config: EngineConfig = DEFAULT_CONFIG,
) -> SummaryResult:
    """Assess a free-text summary against every concept of the topic.

    A concept counts as covered when the summary assesses at or above the
    summary threshold against its statement and keywords, or when it was
    already presumed covered coming in.
    """
    covered: set[str] = set()
    scores: dict[str, float] = {}
    for concept in topic.concepts:
        score = assess(summary, concept.statement, concept.keywords) if summary.strip() \
            else AssessmentScore(0.0, 0.0, 0.0)
        scores[concept.id] = score.value
        if score.value >= config.summary_coverage_threshold:
            covered.add(concept.id)
        elif concept.id in presumed_covered:
            covered.add(concept.id)
    ratio = len(covered) / len(topic.concepts)
    return SummaryResult(
        covered_concept_ids=frozenset(covered),
        ratio=ratio,
        rounds=rounds_for_ratio(ratio, config),
        scores=scores,
    )


# ---------------------------------------------------------------------------
# Skeleton concept maps
# ---------------------------------------------------------------------------

@dataclass
class MapSlot:
    slot_id: str
    role: str  # "node" | "edge"
    answer: str
    blanked: bool
    filled: bool = False


@dataclass
class SkeletonMap:
    map_id: str
    concept_id: str
    triples: list[ConceptTriple]
    slots: list[MapSlot]
    node_bank: list[str]
    edge_bank: list[str]

    def slot(self, slot_id: str) -> MapSlot:
        for s in self.slots:
            if s.slot_id == slot_id:
                return s
        raise UnknownSlot(f"no slot {slot_id} in map {self.map_id}")

    @property
    def complete(self) -> bool:
        return all(s.filled for s in self.slots if s.blanked)


@dataclass(frozen=True)
class MapEntryResult:
    accepted: bool
    bank_entry_removed: str | None
    complete: bool


def _chunk(seq: list, size: int) -> list[list]:
    return [seq[i:i + size] for i in range(0, len(seq), size)]


def generate_skeleton_maps(
    concepts: list[Concept],
    seed: int,
    config: EngineConfig = DEFAULT_CONFIG,
) -> list[SkeletonMap]:
    """Partition each concept's triples into maps of at most four and blank
    a seeded-random nonempty subset of the labels.

    Deterministic for a given (concepts, seed). Concepts contributing no
    triples yield no maps; an entirely tripleless concept set yields an
    empty list (logged, not an error).
    """
    rng = random.Random(seed)
    maps: list[SkeletonMap] = []
    for concept in concepts:
        for part_index, part in enumerate(_chunk(list(concept.triples), MAX_TRIPLES_PER_MAP)):
            map_id = f"{concept.id}-map{part_index + 1}"
            slots: list[MapSlot] = []
            for triple in part:
                for role, answer in (("node", triple.subject),
                                     ("edge", triple.relation),
                                     ("node", triple.object)):
                    slots.append(MapSlot(slot_id=f"{map_id}-s{len(slots)}",
                                         role=role, answer=answer, blanked=False))
            while True:
                for s in slots:
                    s.blanked = rng.random() < config.map_blank_probability
                if any(s.blanked for s in slots):
                    break
            maps.append(SkeletonMap(
                map_id=map_id,
                concept_id=concept.id,
                triples=list(part),
                slots=slots,
                node_bank=sorted(s.answer for s in slots if s.blanked and s.role == "node"),
                edge_bank=sorted(s.answer for s in slots if s.blanked and s.role == "edge"),
            ))
    if not maps:
        logger.info("no triples among %d concepts; no skeleton maps generated",
                    len(concepts))
    return maps


def _answer_matches(typed: str, answer: str) -> bool:
    typed_norm = normalize_text(typed)
    answer_norm = normalize_text(answer)
    if typed_norm == answer_norm:
        return True
    if len(answer_norm) < FUZZY_MIN_ANSWER_LEN:
        return False
    return edit_distance(typed_norm, answer_norm) <= 1


def grade_map_entry(skeleton: SkeletonMap, slot_id: str, typed: str) -> MapEntryResult:
    """Grade one typed label; on accept, fill the slot and pull the
    matching entry out of its role's answer bank."""
    slot = skeleton.slot(slot_id)
    if not slot.blanked:
        raise UnknownSlot(f"slot {slot_id} is not blanked")
    if slot.filled:
        raise SlotAlreadyFilled(f"slot {slot_id} already filled")
    if not _answer_matches(typed, slot.answer):
        return MapEntryResult(accepted=False, bank_entry_removed=None,
                              complete=skeleton.complete)
    slot.filled = True
    bank = skeleton.node_bank if slot.role == "node" else skeleton.edge_bank
    bank.remove(slot.answer)
    return MapEntryResult(accepted=True, bank_entry_removed=slot.answer,
                          complete=skeleton.complete)


# ---------------------------------------------------------------------------
# Cloze task
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClozeBlank:
    blank_id: str
    concept_id: str
    key: str


@dataclass(frozen=True)
class ClozePassage:
    passage_with_blanks: str
    blanks: tuple[ClozeBlank, ...]


def generate_cloze(ideal: IdealSummary) -> ClozePassage:
    """Blank out every concept span of the ideal summary, one blank per
    span, ordered by passage position."""
    if not ideal.concept_spans:
        raise NoSpans("ideal summary has no concept spans")
    spans = sorted(ideal.concept_spans, key=lambda s: s.start)
    pieces: list[str] = []
    blanks: list[ClozeBlank] = []
    cursor = 0
    for i, span in enumerate(spans):
        pieces.append(ideal.passage[cursor:span.start])
        pieces.append(BLANK_MARKER)
        blanks.append(ClozeBlank(blank_id=f"blank{i + 1}",
                                 concept_id=span.concept_id,
                                 key=span.key_term))
        cursor = span.end
    pieces.append(ideal.passage[cursor:])
    return ClozePassage(passage_with_blanks="".join(pieces), blanks=tuple(blanks))


def reconstruct_cloze(passage: ClozePassage, keys: list[str]) -> str:
    """Substitute keys into the blanks in order (identity check helper)."""
    out = passage.passage_with_blanks
    for key in keys:
        out = out.replace(BLANK_MARKER, key, 1)
    return out


def grade_cloze(passage: ClozePassage, responses: dict[str, str]) -> dict[str, float]:
    """Per-blank assessment of typed responses against the blanked keys.

    Missing blanks score 0.0; no feedback objects are produced, scores go
    to the session log only.
    """
    known = {b.blank_id for b in passage.blanks}
    for blank_id in responses:
        if blank_id not in known:
            raise UnknownBlank(f"no blank {blank_id}")
    out: dict[str, float] = {}
    for blank in passage.blanks:
        response = responses.get(blank.blank_id, "")
        if not response.strip():
            out[blank.blank_id] = 0.0
        else:
            out[blank.blank_id] = assess(response, blank.key, [blank.key]).value
    return out
