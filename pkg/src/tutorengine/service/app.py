"""FastAPI service exposing session lifecycle, tasks, tests, and analytics."""

from __future__ import annotations

import csv
import io
import threading
from pathlib import Path

from fastapi import Depends, FastAPI, Header, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from ..analytics import CSV_HEADER, ItemResponseRecord, analysis_report
from ..config import DEFAULT_CONFIG, EngineConfig
from ..curriculum import Curriculum, bundled_curriculum_dir, load_curriculum
from ..errors import EngineError, IllegalEventForPhase, UnknownTest, UnknownTopic
from ..session import (
    ClozeEntry,
    EventKind,
    MapEntry,
    MapSkip,
    Session,
    SessionManager,
    SessionPhase,
    TextTurn,
    turn_payload,
)
from ..testbank import (
    AssembledTest,
    ItemBank,
    Presentation,
    assemble_delayed_test,
    assemble_immediate_tests,
    bundled_item_bank_path,
    load_item_bank,
    presentation_for,
    score_test,
)
from . import schemas

API_PREFIX = "/v1"


class TestRegistry:
    """Assembled tests, per-participant exposure history, response records."""

    def __init__(self, bank: ItemBank, data_dir: Path | None = None):
        self.bank = bank
        self.tests: dict[str, tuple[AssembledTest, str, Presentation]] = {}
        self.seen_items: dict[str, set[str]] = {}
        self.records: list[ItemResponseRecord] = []
        self._lock = threading.Lock()
        self._records_path = (data_dir / "records.csv") if data_dir else None
        if self._records_path and not self._records_path.exists():
            self._records_path.write_text(",".join(CSV_HEADER) + "\n", encoding="utf-8")

    def register(self, test: AssembledTest, participant: str) -> Presentation:
        presentation = presentation_for(test, self.bank, participant)
        with self._lock:
            self.tests[test.test_id] = (test, participant, presentation)
            self.seen_items.setdefault(participant, set()).update(test.items)
        return presentation

    def get(self, test_id: str) -> tuple[AssembledTest, str, Presentation]:
        try:
            return self.tests[test_id]
        except KeyError:
            raise UnknownTest(f"no test {test_id}") from None

    def add_records(self, records: list[ItemResponseRecord]) -> None:
        with self._lock:
            self.records.extend(records)
            if self._records_path:
                with self._records_path.open("a", newline="", encoding="utf-8") as fh:
                    writer = csv.writer(fh)
                    for r in records:
                        writer.writerow([r.participant, r.item, r.condition, r.test,
                                         int(r.correct), r.week, r.cycle])


def _question_view(question) -> schemas.QuestionView | None:
    if question is None:
        return None
    return schemas.QuestionView(id=question.id, kind=question.kind.value,
                                text=question.text)


def _turn_view(payload: dict, seq: int | None = None) -> schemas.TutorTurnView:
    question = payload.get("question")
    return schemas.TutorTurnView(
        speech=payload["speech"],
        feedback=payload.get("feedback"),
        solidarity=payload.get("solidarity"),
        question=schemas.QuestionView(**question) if question else None,
        mediaReveals=payload.get("mediaReveals", []),
        mediaDirective=payload.get("mediaDirective"),
        phaseHint=payload.get("phaseHint", ""),
        seq=seq,
    )


def _turns_to_views(turns) -> list[schemas.TutorTurnView]:
    return [_turn_view(turn_payload(t)) for t in turns]


def _task_payload(session: Session):
    if session.phase in (SessionPhase.CONCEPT_MAPS_1, SessionPhase.CONCEPT_MAPS_2):
        current = session.current_map
        if current is None:
            return None

        def cell(slot):
            visible = (not slot.blanked) or slot.filled
            return schemas.MapCellView(
                slotId=slot.slot_id, role=slot.role, blanked=slot.blanked,
                filled=slot.filled, text=slot.answer if visible else None)

        triples = []
        for i in range(0, len(current.slots), 3):
            subject, relation, obj = current.slots[i:i + 3]
            triples.append(schemas.MapTripleView(
                subject=cell(subject), relation=cell(relation), object=cell(obj)))
        return schemas.ConceptMapPayload(
            mapId=current.map_id,
            mapIndex=session.map_index,
            mapCount=len(session.maps),
            triples=triples,
            nodeBank=list(current.node_bank),
            edgeBank=list(current.edge_bank),
        )
    if session.phase == SessionPhase.CLOZE and session.cloze is not None:
        return schemas.ClozePayload(
            passage=session.cloze.passage_with_blanks,
            blanks=[schemas.ClozeBlankView(
                blankId=b.blank_id,
                submitted=b.blank_id in session.cloze_responses)
                for b in session.cloze.blanks],
        )
    return None


def _session_view(session: Session) -> schemas.ApiSessionView:
    return schemas.ApiSessionView(
        sessionId=session.session_id,
        phase=session.phase.value,
        pendingQuestion=_question_view(session.pending_question),
        mediaVisible=list(session.media_visible),
        taskPayload=_task_payload(session),
        progress=session.progress(),
        wrapUp=session.wrap_up_advised(),
    )


def create_app(
    curriculum: Curriculum | str | Path | None = None,
    data_dir: str | Path | None = None,
    config: EngineConfig = DEFAULT_CONFIG,
    item_bank: ItemBank | str | Path | None = None,
    auth_token: str | None = None,
) -> FastAPI:
    if curriculum is None:
        curriculum = load_curriculum(bundled_curriculum_dir())
    elif not isinstance(curriculum, Curriculum):
        curriculum = load_curriculum(curriculum)
    if item_bank is None:
        item_bank = load_item_bank(bundled_item_bank_path())
    elif not isinstance(item_bank, ItemBank):
        item_bank = load_item_bank(item_bank)

    data_path = Path(data_dir) if data_dir else None
    if data_path:
        data_path.mkdir(parents=True, exist_ok=True)
    manager = SessionManager(curriculum, data_dir=data_path, config=config)
    registry = TestRegistry(item_bank, data_dir=data_path)

    app = FastAPI(title="tutorengine", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
    )
    app.state.manager = manager
    app.state.registry = registry

    class EngineAuthError(EngineError):
        code = "unauthorized"
        http_status = 401

    async def require_token(x_auth_token: str | None = Header(default=None)):
        if auth_token is not None and x_auth_token != auth_token:
            raise EngineAuthError("missing or invalid auth token")

    @app.exception_handler(EngineError)
    async def engine_error_handler(request: Request, exc: EngineError):
        return JSONResponse(
            status_code=exc.http_status,
            content=schemas.ErrorBody(code=exc.code, message=str(exc)).model_dump(),
        )

    dependencies = [Depends(require_token)]

    # --- topics ---

    @app.get(f"{API_PREFIX}/topics", response_model=list[schemas.TopicSummary],
             dependencies=dependencies)
    def list_topics():
        return [
            schemas.TopicSummary(id=t.id, name=t.name, preview=t.preview,
                                 conceptCount=len(t.concepts))
            for t in curriculum.topics.values()
        ]

    # --- sessions ---

    @app.post(f"{API_PREFIX}/sessions", response_model=schemas.ApiSessionView,
              status_code=201, dependencies=dependencies)
    def create_session(body: schemas.SessionCreateRequest):
        session, _ = manager.start_session(body.studentId, body.topicId, seed=body.seed)
        return _session_view(session)

    @app.get(f"{API_PREFIX}/sessions/{{session_id}}",
             response_model=schemas.ApiSessionView, dependencies=dependencies)
    def get_session(session_id: str):
        return _session_view(manager.get(session_id))

    @app.get(f"{API_PREFIX}/sessions/{{session_id}}/turns",
             response_model=schemas.TurnLogResponse, dependencies=dependencies)
    def get_turns(session_id: str, since: int = 0):
        session = manager.get(session_id)
        turns = [
            _turn_view(e.payload, seq=e.seq)
            for e in session.events
            if e.kind == EventKind.TUTOR_TURN and e.seq > since
        ]
        return schemas.TurnLogResponse(turns=turns)

    @app.get(f"{API_PREFIX}/sessions/{{session_id}}/model",
             response_model=schemas.StudentModelView, dependencies=dependencies)
    def get_model(session_id: str):
        session = manager.get(session_id)
        return schemas.StudentModelView(
            studentId=session.student_id,
            perConcept={
                cid: schemas.ConceptMasteryView(
                    coverage=session.model.coverage(cid),
                    presumedCovered=session.model.is_presumed(cid))
                for cid in session.topic.concept_ids
            },
        )

    @app.post(f"{API_PREFIX}/sessions/{{session_id}}/turn",
              response_model=schemas.TurnResponse, dependencies=dependencies)
    def submit_turn(session_id: str, body: schemas.TurnRequest):
        result = manager.advance(session_id, TextTurn(body.text))
        session = manager.get(session_id)
        return schemas.TurnResponse(tutorTurns=_turns_to_views(result.turns),
                                    view=_session_view(session))

    @app.post(f"{API_PREFIX}/sessions/{{session_id}}/task",
              dependencies=dependencies)
    def submit_task(session_id: str, body: schemas.TaskRequest):
        session = manager.get(session_id)
        if body.action == "skip":
            result = manager.advance(session_id, MapSkip())
            return schemas.TaskAckResponse(
                tutorTurns=_turns_to_views(result.turns),
                view=_session_view(session)).model_dump()
        if body.slotId is not None:
            graded = session.current_map
            result = manager.advance(session_id, MapEntry(body.slotId, body.answer or ""))
            task = result.task_result
            bank_remaining = (len(graded.node_bank) + len(graded.edge_bank)
                              if graded else 0)
            return schemas.MapEntryResponse(
                accepted=task.accepted,
                bankEntryRemoved=task.bank_entry_removed,
                complete=task.complete,
                bankRemaining=bank_remaining,
                tutorTurns=_turns_to_views(result.turns),
                view=_session_view(session)).model_dump()
        if body.blankId is not None:
            result = manager.advance(session_id, ClozeEntry(body.blankId, body.answer or ""))
            remaining = (len(session.cloze.blanks) - len(session.cloze_responses)
                         if session.cloze else 0)
            # acknowledgment only; cloze scores never leave the engine
            return schemas.TaskAckResponse(
                remaining=remaining,
                tutorTurns=_turns_to_views(result.turns),
                view=_session_view(session)).model_dump()
        raise IllegalEventForPhase("task submission needs slotId, blankId, or action")

    # --- knowledge tests ---

    def _test_view(test: AssembledTest, presentation: Presentation) -> schemas.TestView:
        items = []
        for item_id in presentation.item_order:
            item = item_bank.item(item_id)
            perm = presentation.option_order[item_id]
            items.append(schemas.TestItemView(
                itemId=item_id,
                stem=item.stem,
                options=[item.options[i] for i in perm],
            ))
        return schemas.TestView(testId=test.test_id, kind=test.kind.value, items=items)

    @app.post(f"{API_PREFIX}/tests", dependencies=dependencies)
    def assemble_tests(body: schemas.ImmediateTestsRequest | schemas.DelayedTestRequest):
        if isinstance(body, schemas.ImmediateTestsRequest):
            for topic_id in (body.tutoredTopicId, body.untutoredTopicId):
                if not item_bank.by_topic(topic_id):
                    raise UnknownTopic(f"no items for topic {topic_id}")
            pre, post = assemble_immediate_tests(
                item_bank, body.tutoredTopicId, body.untutoredTopicId, seed=body.seed)
            pre_presentation = registry.register(pre, body.participantId)
            post_presentation = registry.register(post, body.participantId)
            return schemas.ImmediateTestsResponse(
                pre=_test_view(pre, pre_presentation),
                post=_test_view(post, post_presentation)).model_dump()
        seen = registry.seen_items.get(body.participantId, set())
        test = assemble_delayed_test(item_bank, body.cycleTopicIds, seen, seed=body.seed)
        presentation = registry.register(test, body.participantId)
        return _test_view(test, presentation).model_dump()

    @app.get(f"{API_PREFIX}/tests/{{test_id}}", response_model=schemas.TestView,
             dependencies=dependencies)
    def get_test(test_id: str):
        test, _, presentation = registry.get(test_id)
        return _test_view(test, presentation)

    @app.post(f"{API_PREFIX}/sessions/{{session_id}}/test",
              response_model=schemas.TestAckResponse, dependencies=dependencies)
    def submit_test(session_id: str, body: schemas.TestSubmitRequest):
        session = manager.get(session_id)
        test, participant, presentation = registry.get(body.testId)
        # translate presented option indices back to canonical key space
        canonical: dict[str, int] = {}
        for item_id, presented_index in body.answers.items():
            perm = presentation.option_order.get(item_id)
            if perm is None or not 0 <= presented_index <= 3:
                continue
            canonical[item_id] = perm[presented_index]
        records = score_test(test, item_bank, canonical,
                             participant=participant or session.student_id,
                             condition="ITS", week=body.week, cycle=body.cycle)
        registry.add_records(records)
        # acknowledgment only; correctness never returns to the client
        return schemas.TestAckResponse(itemCount=len(records))

    # --- analytics ---

    @app.get(f"{API_PREFIX}/analytics/export.csv", dependencies=dependencies)
    def export_csv():
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(CSV_HEADER)
        for r in registry.records:
            writer.writerow([r.participant, r.item, r.condition, r.test,
                             int(r.correct), r.week, r.cycle])
        return Response(content=buf.getvalue(), media_type="text/csv")

    @app.get(f"{API_PREFIX}/analytics/report", dependencies=dependencies)
    def report(design: str = "condition*test"):
        return analysis_report(registry.records, design=design)

    return app
