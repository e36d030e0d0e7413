"""Curriculum data model and loader.

A curriculum directory holds one JSON document per topic (validated
against the bundled JSON Schema) plus an optional ``standards.json``
index grouping topics under curriculum standards. Everything is
immutable after load and safe to share across concurrent sessions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from .errors import DanglingReference, MissingFile, SchemaViolation
from .textmatch import tokenize

STANDARDS_FILENAME = "standards.json"


class QuestionKind(str, Enum):
    CONCEPT_COMPLETION = "ConceptCompletion"
    VERIFICATION = "Verification"
    COMPREHENSION_GAUGING = "ComprehensionGauging"
    PROMPT = "Prompt"


LECTURE_QUESTION_KINDS = {
    QuestionKind.CONCEPT_COMPLETION,
    QuestionKind.VERIFICATION,
    QuestionKind.COMPREHENSION_GAUGING,
}

VERIFICATION_ANSWERS = {"yes", "no"}


@dataclass(frozen=True)
class ConceptTriple:
    subject: str
    relation: str
    object: str


@dataclass(frozen=True)
class QuestionTemplate:
    id: str
    kind: QuestionKind
    text: str
    expected_answer: str
    concept_id: str
    # Position in curriculum load order; canonical tie-break for selection.
    order: int = 0


@dataclass(frozen=True)
class MediaAsset:
    id: str
    uri: str
    caption: str


@dataclass(frozen=True)
class SummarySpan:
    concept_id: str
    start: int
    end: int
    key_term: str


@dataclass(frozen=True)
class IdealSummary:
    passage: str
    concept_spans: tuple[SummarySpan, ...]


@dataclass(frozen=True)
class LectureStep:
    id: str
    concept_id: str
    segments: tuple[str, ...]
    question: QuestionTemplate
    media_reveals: tuple[str, ...] = ()


@dataclass(frozen=True)
class Concept:
    id: str
    statement: str
    keywords: tuple[str, ...]
    triples: tuple[ConceptTriple, ...]
    prompts: tuple[QuestionTemplate, ...]
    verification_questions: tuple[QuestionTemplate, ...]
    media_refs: tuple[str, ...] = ()
    # Short phrase naming what the concept is about, used by preview
    # generation; empty means fall back to the topic name.
    focus: str = ""


@dataclass(frozen=True)
class Topic:
    id: str
    name: str
    preview: str
    concepts: tuple[Concept, ...]
    ideal_summary: IdealSummary
    lecture_script: tuple[LectureStep, ...]
    media_assets: tuple[MediaAsset, ...]

    def concept(self, concept_id: str) -> Concept:
        for c in self.concepts:
            if c.id == concept_id:
                return c
        raise KeyError(concept_id)

    @property
    def concept_ids(self) -> list[str]:
        return [c.id for c in self.concepts]

    def question(self, question_id: str) -> QuestionTemplate | None:
        for q in self.all_questions():
            if q.id == question_id:
                return q
        return None

    def all_questions(self):
        for step in self.lecture_script:
            yield step.question
        for c in self.concepts:
            yield from c.prompts
            yield from c.verification_questions


@dataclass(frozen=True)
class CurriculumStandard:
    id: str
    description: str
    topics: tuple[str, ...]


@dataclass(frozen=True)
class Curriculum:
    topics: dict[str, Topic] = field(default_factory=dict)
    standards: tuple[CurriculumStandard, ...] = ()

    def topic(self, topic_id: str) -> Topic | None:
        return self.topics.get(topic_id)


@dataclass(frozen=True)
class Violation:
    field: str
    rule: str
    message: str = ""


@lru_cache(maxsize=1)
def topic_schema() -> dict:
    raw = resources.files("tutorengine.resources").joinpath("topic.schema.json").read_text("utf-8")
    return json.loads(raw)


def bundled_curriculum_dir() -> Path:
    """Directory of the demo curriculum shipped with the package."""
    return Path(str(resources.files("tutorengine.resources").joinpath("curriculum")))


# --- construction from JSON ---

def _question_from_dict(d: dict, order: int) -> QuestionTemplate:
    return QuestionTemplate(
        id=d["id"],
        kind=QuestionKind(d["kind"]),
        text=d["text"],
        expected_answer=d["expectedAnswer"],
        concept_id=d["conceptId"],
        order=order,
    )


def topic_from_dict(doc: dict) -> Topic:
    """Build a Topic from its JSON document. Assumes schema-valid input."""
    order = 0

    def next_order() -> int:
        nonlocal order
        order += 1
        return order

    concepts = []
    for c in doc["concepts"]:
        concepts.append(Concept(
            id=c["id"],
            statement=c["statement"],
            keywords=tuple(c["keywords"]),
            triples=tuple(ConceptTriple(t["subject"], t["relation"], t["object"])
                          for t in c["triples"]),
            prompts=tuple(_question_from_dict(q, next_order()) for q in c["prompts"]),
            verification_questions=tuple(
                _question_from_dict(q, next_order()) for q in c["verificationQuestions"]),
            media_refs=tuple(c.get("mediaRefs", [])),
            focus=c.get("focus", ""),
        ))
    spans = tuple(SummarySpan(s["conceptId"], s["start"], s["end"], s["keyTerm"])
                  for s in doc["idealSummary"]["conceptSpans"])
    steps = tuple(LectureStep(
        id=s["id"],
        concept_id=s["conceptId"],
        segments=tuple(s["segments"]),
        question=_question_from_dict(s["question"], next_order()),
        media_reveals=tuple(s.get("mediaReveals", [])),
    ) for s in doc["lectureScript"])
    return Topic(
        id=doc["id"],
        name=doc["name"],
        preview=doc["preview"],
        concepts=tuple(concepts),
        ideal_summary=IdealSummary(doc["idealSummary"]["passage"], spans),
        lecture_script=steps,
        media_assets=tuple(MediaAsset(m["id"], m["uri"], m["caption"])
                           for m in doc["mediaAssets"]),
    )


def _question_to_dict(q: QuestionTemplate) -> dict:
    return {
        "id": q.id,
        "kind": q.kind.value,
        "text": q.text,
        "expectedAnswer": q.expected_answer,
        "conceptId": q.concept_id,
    }


def topic_to_dict(topic: Topic) -> dict:
    """Serialize a Topic back to its file format (round-trips with load)."""
    return {
        "id": topic.id,
        "name": topic.name,
        "preview": topic.preview,
        "concepts": [
            {
                "id": c.id,
                "statement": c.statement,
                "focus": c.focus,
                "keywords": list(c.keywords),
                "triples": [
                    {"subject": t.subject, "relation": t.relation, "object": t.object}
                    for t in c.triples
                ],
                "prompts": [_question_to_dict(q) for q in c.prompts],
                "verificationQuestions": [_question_to_dict(q) for q in c.verification_questions],
                "mediaRefs": list(c.media_refs),
            }
            for c in topic.concepts
        ],
        "idealSummary": {
            "passage": topic.ideal_summary.passage,
            "conceptSpans": [
                {"conceptId": s.concept_id, "start": s.start, "end": s.end, "keyTerm": s.key_term}
                for s in topic.ideal_summary.concept_spans
            ],
        },
        "lectureScript": [
            {
                "id": s.id,
                "conceptId": s.concept_id,
                "segments": list(s.segments),
                "question": _question_to_dict(s.question),
                "mediaReveals": list(s.media_reveals),
            }
            for s in topic.lecture_script
        ],
        "mediaAssets": [
            {"id": m.id, "uri": m.uri, "caption": m.caption} for m in topic.media_assets
        ],
    }


# --- validation ---

def validate_topic(topic: Topic) -> list[Violation]:
    """Check every Topic/Concept invariant; violations are data, not errors."""
    out: list[Violation] = []

    if not topic.concepts:
        out.append(Violation("concepts", "non-empty", f"topic {topic.id} has no concepts"))
    concept_ids = [c.id for c in topic.concepts]
    if len(set(concept_ids)) != len(concept_ids):
        out.append(Violation("concepts", "unique-ids", "duplicate concept ids"))

    media_ids = [m.id for m in topic.media_assets]
    if len(set(media_ids)) != len(media_ids):
        out.append(Violation("mediaAssets", "unique-ids", "duplicate media asset ids"))
    media_set = set(media_ids)

    for c in topic.concepts:
        where = f"concepts[{c.id}]"
        if not c.statement.strip():
            out.append(Violation(f"{where}.statement", "non-empty"))
        if not c.keywords:
            out.append(Violation(f"{where}.keywords", "non-empty"))
        statement_tokens = {t.normalized for t in tokenize(c.statement)}
        for kw in c.keywords:
            if kw not in statement_tokens:
                out.append(Violation(
                    f"{where}.keywords", "subset-of-statement",
                    f"keyword {kw!r} not a token of the statement"))
        for t in c.triples:
            if not (t.subject.strip() and t.relation.strip() and t.object.strip()):
                out.append(Violation(f"{where}.triples", "non-empty-fields"))
        if not c.prompts:
            out.append(Violation(f"{where}.prompts", "at-least-one"))
        if not c.verification_questions:
            out.append(Violation(f"{where}.verificationQuestions", "at-least-one"))
        for q in list(c.prompts) + list(c.verification_questions):
            if q.concept_id != c.id:
                out.append(Violation(f"{where}.questions", "concept-id-match",
                                     f"question {q.id} names concept {q.concept_id}"))
        for q in c.verification_questions:
            if q.expected_answer.strip().lower() not in VERIFICATION_ANSWERS:
                out.append(Violation(f"{where}.verificationQuestions", "yes-no-answer",
                                     f"question {q.id} expects {q.expected_answer!r}"))
        for q in c.prompts:
            if not q.expected_answer.strip():
                out.append(Violation(f"{where}.prompts", "non-empty-answer",
                                     f"question {q.id}"))
        for ref in c.media_refs:
            if ref not in media_set:
                out.append(Violation(f"{where}.mediaRefs", "asset-exists", ref))

    known = set(concept_ids)
    for step in topic.lecture_script:
        if step.concept_id not in known:
            out.append(Violation(f"lectureScript[{step.id}]", "concept-exists",
                                 step.concept_id))
        if step.question.kind not in LECTURE_QUESTION_KINDS:
            out.append(Violation(f"lectureScript[{step.id}].question", "lecture-kind",
                                 step.question.kind.value))
        if (step.question.kind == QuestionKind.VERIFICATION
                or step.question.kind == QuestionKind.COMPREHENSION_GAUGING):
            if step.question.expected_answer.strip().lower() not in VERIFICATION_ANSWERS:
                out.append(Violation(f"lectureScript[{step.id}].question", "yes-no-answer"))
        elif not step.question.expected_answer.strip():
            out.append(Violation(f"lectureScript[{step.id}].question", "non-empty-answer"))
        for ref in step.media_reveals:
            if ref not in media_set:
                out.append(Violation(f"lectureScript[{step.id}].mediaReveals",
                                     "asset-exists", ref))

    ideal = topic.ideal_summary
    passage = ideal.passage
    seen_concepts: list[str] = []
    ordered = sorted(ideal.concept_spans, key=lambda s: s.start)
    prev_end = 0
    for s in ordered:
        where = f"idealSummary.conceptSpans[{s.concept_id}]"
        if s.end < s.start or s.start < 0 or s.end > len(passage):
            out.append(Violation("conceptSpans", "bounds",
                                 f"{where}: [{s.start}, {s.end})"))
            continue
        if s.start < prev_end:
            out.append(Violation("conceptSpans", "non-overlapping", where))
        prev_end = max(prev_end, s.end)
        if passage[s.start:s.end] != s.key_term:
            out.append(Violation("conceptSpans", "key-term-matches-passage",
                                 f"{where}: {passage[s.start:s.end]!r} != {s.key_term!r}"))
        if s.concept_id not in known:
            out.append(Violation("conceptSpans", "concept-exists", s.concept_id))
        seen_concepts.append(s.concept_id)
    for cid in known:
        n = seen_concepts.count(cid)
        if n != 1:
            out.append(Violation("idealSummary", "covers-every-concept-once",
                                 f"concept {cid} referenced {n} times"))
    return out


def validate_standard(std: CurriculumStandard, topics: dict[str, Topic]) -> list[Violation]:
    out: list[Violation] = []
    if not std.description.strip():
        out.append(Violation(f"standards[{std.id}].description", "non-empty"))
    if len(set(std.topics)) != len(std.topics):
        out.append(Violation(f"standards[{std.id}].topics", "unique-ids"))
    for tid in std.topics:
        if tid not in topics:
            out.append(Violation(f"standards[{std.id}].topics", "topic-exists", tid))
    return out


# --- loading ---

def load_topic_file(path: Path) -> Topic:
    try:
        doc = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaViolation("$", path.stem, f"{path}: invalid JSON: {exc}") from exc
    try:
        jsonschema.validate(doc, topic_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "$"
        raise SchemaViolation(where, doc.get("id", path.stem), exc.message) from exc

    topic = topic_from_dict(doc)

    # The loader is strictly stronger than validate_topic: anything it
    # accepts must validate clean.
    violations = validate_topic(topic)
    for v in violations:
        if v.rule in ("concept-exists", "asset-exists"):
            raise DanglingReference(v.message or v.field)
    if violations:
        v = violations[0]
        raise SchemaViolation(v.field, topic.id, f"{v.rule}: {v.message}")
    return topic


def load_curriculum(path: str | Path) -> Curriculum:
    """Load every topic document (and optional standards index) under path."""
    root = Path(path)
    if not root.exists():
        raise MissingFile(f"curriculum directory not found: {root}")
    if not root.is_dir():
        raise MissingFile(f"not a directory: {root}")

    topics: dict[str, Topic] = {}
    for topic_path in sorted(root.glob("*.json")):
        if topic_path.name == STANDARDS_FILENAME:
            continue
        topic = load_topic_file(topic_path)
        if topic.id in topics:
            raise SchemaViolation("id", topic.id, "duplicate topic id")
        topics[topic.id] = topic

    standards: list[CurriculumStandard] = []
    standards_path = root / STANDARDS_FILENAME
    if standards_path.exists():
        docs = json.loads(standards_path.read_text("utf-8"))
        for d in docs:
            std = CurriculumStandard(d["id"], d["description"], tuple(d["topics"]))
            for v in validate_standard(std, topics):
                if v.rule == "topic-exists":
                    raise DanglingReference(v.message or v.field)
                raise SchemaViolation(v.field, "standards", v.rule)
            standards.append(std)

    return Curriculum(topics=topics, standards=tuple(standards))
