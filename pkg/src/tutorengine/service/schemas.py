"""Request/response models for the /v1 JSON API.

Answer keys never appear in any response model while the session or test
is open: question payloads carry no expected answer, map cells expose
text only once visible (authored label or an accepted fill), cloze
blanks expose ids only, and test items carry stems and options without
the key index.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class QuestionView(BaseModel):
    id: str
    kind: str
    text: str


class TutorTurnView(BaseModel):
    speech: list[str]
    feedback: Optional[str] = None
    solidarity: Optional[str] = None
    question: Optional[QuestionView] = None
    mediaReveals: list[str] = Field(default_factory=list)
    mediaDirective: Optional[str] = None
    phaseHint: str = ""
    seq: Optional[int] = None


class MapCellView(BaseModel):
    slotId: str
    role: Literal["node", "edge"]
    blanked: bool
    filled: bool
    text: Optional[str] = None  # visible label; None while hidden


class MapTripleView(BaseModel):
    subject: MapCellView
    relation: MapCellView
    object: MapCellView


class ConceptMapPayload(BaseModel):
    kind: Literal["conceptMap"] = "conceptMap"
    mapId: str
    mapIndex: int
    mapCount: int
    triples: list[MapTripleView]
    nodeBank: list[str]
    edgeBank: list[str]


class ClozeBlankView(BaseModel):
    blankId: str
    submitted: bool


class ClozePayload(BaseModel):
    kind: Literal["cloze"] = "cloze"
    passage: str
    blanks: list[ClozeBlankView]


class ApiSessionView(BaseModel):
    sessionId: str
    phase: str
    pendingQuestion: Optional[QuestionView] = None
    mediaVisible: list[str] = Field(default_factory=list)
    taskPayload: Optional[ConceptMapPayload | ClozePayload] = None
    progress: float
    wrapUp: bool = False


class SessionCreateRequest(BaseModel):
    studentId: str = Field(min_length=1)
    topicId: str = Field(min_length=1)
    seed: Optional[int] = None


class TurnRequest(BaseModel):
    text: str


class TurnResponse(BaseModel):
    tutorTurns: list[TutorTurnView]
    view: ApiSessionView


class TaskRequest(BaseModel):
    # one of: map entry (slotId+answer), map skip (action), cloze entry
    slotId: Optional[str] = None
    blankId: Optional[str] = None
    answer: Optional[str] = None
    action: Optional[Literal["skip"]] = None


class MapEntryResponse(BaseModel):
    accepted: bool
    bankEntryRemoved: Optional[str] = None
    complete: bool
    bankRemaining: int
    tutorTurns: list[TutorTurnView] = Field(default_factory=list)
    view: ApiSessionView


class TaskAckResponse(BaseModel):
    status: Literal["recorded"] = "recorded"
    remaining: int = 0
    tutorTurns: list[TutorTurnView] = Field(default_factory=list)
    view: ApiSessionView


class TopicSummary(BaseModel):
    id: str
    name: str
    preview: str
    conceptCount: int


class TurnLogResponse(BaseModel):
    turns: list[TutorTurnView]


class ConceptMasteryView(BaseModel):
    coverage: float
    presumedCovered: bool


class StudentModelView(BaseModel):
    studentId: str
    perConcept: dict[str, ConceptMasteryView]


class TestItemView(BaseModel):
    itemId: str
    stem: str
    options: list[str]


class TestView(BaseModel):
    testId: str
    kind: str
    items: list[TestItemView]


class ImmediateTestsRequest(BaseModel):
    participantId: str = Field(min_length=1)
    kind: Literal["immediate"] = "immediate"
    tutoredTopicId: str
    untutoredTopicId: str
    seed: int


class DelayedTestRequest(BaseModel):
    participantId: str = Field(min_length=1)
    kind: Literal["delayed"] = "delayed"
    cycleTopicIds: list[str]
    seed: int


class ImmediateTestsResponse(BaseModel):
    pre: TestView
    post: TestView


class TestSubmitRequest(BaseModel):
    testId: str
    answers: dict[str, int]
    week: int = 0
    cycle: int = 0


class TestAckResponse(BaseModel):
    status: Literal["recorded"] = "recorded"
    itemCount: int


class ErrorBody(BaseModel):
    code: str
    message: str
