"""Per-student concept mastery model.

Coverage is monotone nondecreasing within a session (max rule) and only
recall evidence may move it: summaries, scaffold answers, and cloze
responses. Concept-map grading is recognition and is rejected as a
coverage source.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum

from .errors import IllegalSource, OutOfRange


class CoverageSource(str, Enum):
    SUMMARY = "summary"
    SCAFFOLD = "scaffold"
    CLOZE = "cloze"
    CONCEPT_MAP = "conceptMap"


RECALL_SOURCES = {CoverageSource.SUMMARY, CoverageSource.SCAFFOLD, CoverageSource.CLOZE}


@dataclass
class ConceptMastery:
    coverage: float = 0.0
    presumed_covered: bool = False
    last_assessed: str | None = None


@dataclass
class StudentModel:
    student_id: str
    per_concept: dict[str, ConceptMastery] = field(default_factory=dict)

    def mastery(self, concept_id: str) -> ConceptMastery:
        return self.per_concept.setdefault(concept_id, ConceptMastery())

    def coverage(self, concept_id: str) -> float:
        m = self.per_concept.get(concept_id)
        return m.coverage if m else 0.0

    def is_presumed(self, concept_id: str) -> bool:
        m = self.per_concept.get(concept_id)
        return bool(m and m.presumed_covered)

    def update(
        self,
        concept_id: str,
        score: float,
        source: CoverageSource,
        presumed_threshold: float,
        now: str | None = None,
    ) -> float:
        """Apply one recall assessment; returns the new coverage."""
        if source not in RECALL_SOURCES:
            raise IllegalSource(
                f"{source.value} grading is recognition evidence and cannot update coverage")
        if not 0.0 <= score <= 1.0:
            raise OutOfRange(f"score {score} outside [0, 1]")
        m = self.mastery(concept_id)
        m.coverage = max(m.coverage, score)
        if source == CoverageSource.SUMMARY and score >= presumed_threshold:
            m.presumed_covered = True
        m.last_assessed = now or datetime.now(timezone.utc).isoformat()
        return m.coverage

    def to_dict(self) -> dict:
        return {
            "studentId": self.student_id,
            "perConcept": {
                cid: {
                    "coverage": m.coverage,
                    "presumedCovered": m.presumed_covered,
                    "lastAssessed": m.last_assessed,
                }
                for cid, m in sorted(self.per_concept.items())
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StudentModel":
        model = cls(student_id=d["studentId"])
        for cid, m in d.get("perConcept", {}).items():
            model.per_concept[cid] = ConceptMastery(
                coverage=m["coverage"],
                presumed_covered=m["presumedCovered"],
                last_assessed=m.get("lastAssessed"),
            )
        return model
