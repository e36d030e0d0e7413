"""Seven-phase session state machine, event log, and session manager.

A session runs Lecture -> Summary -> ConceptMaps I -> Scaffolding I
[-> ConceptMaps II -> Scaffolding II] -> Cloze -> Complete, with the
second round scheduled only when the summary covers a third or less of
the topic. Every step is appended to a JSONL event log before returning,
and replaying a log through the same machine (same seed) reproduces the
final state bit for bit.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

from .commonground import DialogueBasis
from .config import DEFAULT_CONFIG, EngineConfig
from .curriculum import Curriculum, QuestionTemplate, Topic
from .dialogue import (
    Assessment,
    LectureState,
    ScaffoldState,
    SolidarityPicker,
    TutorTurn,
    handle_initiative,
    lecture_step,
    scaffold_step,
    templates,
)
from .dialogue import DialogueContext
from .errors import (
    BlankAlreadyFilled,
    IllegalEventForPhase,
    SessionAlreadyOpen,
    SessionComplete,
    SessionConflict,
    UnknownBlank,
    UnknownSession,
    UnknownTopic,
)
from .speechact import ActKind, classify
from .student import CoverageSource, StudentModel
from .tasks import (
    SkeletonMap,
    MapEntryResult,
    generate_cloze,
    generate_skeleton_maps,
    grade_cloze,
    grade_map_entry,
    grade_summary,
)


class SessionPhase(str, Enum):
    LECTURE = "Lecture"
    SUMMARY = "Summary"
    CONCEPT_MAPS_1 = "ConceptMaps1"
    SCAFFOLDING_1 = "Scaffolding1"
    CONCEPT_MAPS_2 = "ConceptMaps2"
    SCAFFOLDING_2 = "Scaffolding2"
    CLOZE = "Cloze"
    COMPLETE = "Complete"


PHASE_ORDER = list(SessionPhase)

TEXT_PHASES = {SessionPhase.LECTURE, SessionPhase.SUMMARY,
               SessionPhase.SCAFFOLDING_1, SessionPhase.SCAFFOLDING_2}
MAP_PHASES = {SessionPhase.CONCEPT_MAPS_1, SessionPhase.CONCEPT_MAPS_2}


class EventKind(str, Enum):
    STUDENT_UTTERANCE = "StudentUtterance"
    TUTOR_TURN = "TutorTurn"
    TASK_SUBMISSION = "TaskSubmission"
    PHASE_CHANGE = "PhaseChange"
    ASSESSMENT_RECORD = "AssessmentRecord"


@dataclass(frozen=True)
class SessionEvent:
    seq: int
    timestamp: str
    kind: EventKind
    payload: dict

    def to_dict(self) -> dict:
        return {"seq": self.seq, "timestamp": self.timestamp,
                "kind": self.kind.value, "payload": self.payload}


# Student-originated events fed to Session.advance.

@dataclass(frozen=True)
class TextTurn:
    text: str


@dataclass(frozen=True)
class MapEntry:
    slot_id: str
    answer: str


@dataclass(frozen=True)
class MapSkip:
    pass


@dataclass(frozen=True)
class ClozeEntry:
    blank_id: str
    answer: str


StudentEvent = TextTurn | MapEntry | MapSkip | ClozeEntry


@dataclass
class AdvanceResult:
    turns: list[TutorTurn] = field(default_factory=list)
    task_result: MapEntryResult | None = None


def turn_payload(turn: TutorTurn) -> dict:
    return {
        "speech": list(turn.speech),
        "feedback": turn.feedback.value if turn.feedback else None,
        "solidarity": turn.solidarity,
        "question": ({"id": turn.question.id, "kind": turn.question.kind.value,
                      "text": turn.question.text} if turn.question else None),
        "mediaReveals": list(turn.media_reveals),
        "mediaDirective": turn.media_directive,
        "phaseHint": turn.phase_hint,
    }


class Session:
    """One student working one topic. Single-threaded per session: the
    manager serializes advance calls and rejects concurrent submissions."""

    def __init__(
        self,
        session_id: str,
        student_id: str,
        topic: Topic,
        model: StudentModel,
        seed: int,
        config: EngineConfig = DEFAULT_CONFIG,
        log_path: Path | None = None,
    ):
        self.session_id = session_id
        self.student_id = student_id
        self.topic = topic
        self.model = model
        self.seed = seed
        self.config = config
        self.log_path = log_path

        self.phase = SessionPhase.LECTURE
        self.rounds: int | None = None
        self.basis = DialogueBasis(config.basis_residual_epsilon)
        self.lecture = LectureState()
        self.scaffold = ScaffoldState()
        self.maps: list[SkeletonMap] = []
        self.map_index = 0
        self.skipped_maps: list[str] = []
        self.cloze = None
        self.cloze_responses: dict[str, str] = {}
        self.media_visible: list[str] = []
        self.events: list[SessionEvent] = []
        self.seq = 0
        self.previous_turn: TutorTurn | None = None
        self.solidarity = SolidarityPicker()
        self.started_at = time.monotonic()
        self.summary_result = None

        self.initial_skip = frozenset(
            cid for cid in topic.concept_ids
            if (config.persist_presumed and model.is_presumed(cid))
            or model.coverage(cid) >= config.mastery_threshold
        )

    # ------------------------------------------------------------------
    # event log
    # ------------------------------------------------------------------

    def _log(self, kind: EventKind, payload: dict) -> None:
        self.seq += 1
        event = SessionEvent(
            seq=self.seq,
            timestamp=datetime.now(timezone.utc).isoformat(),
            kind=kind,
            payload=payload,
        )
        self.events.append(event)
        if self.log_path is not None:
            with self.log_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(event.to_dict()) + "\n")

    def _log_turn(self, turn: TutorTurn) -> None:
        turn.phase_hint = self.phase.value
        if turn.media_directive in ("clear", "reset"):
            self.media_visible = []
        for asset in turn.media_reveals:
            if asset not in self.media_visible:
                self.media_visible.append(asset)
        self._log(EventKind.TUTOR_TURN, turn_payload(turn))
        self.previous_turn = turn
        if self.config.basis_source in ("both", "tutor"):
            text = " ".join(turn.speech)
            if turn.question is not None:
                text = f"{text} {turn.question.text}".strip()
            if text:
                self.basis.add_turn(text)

    def _log_assessments(self, assessments: list[Assessment]) -> None:
        for a in assessments:
            self._log(EventKind.ASSESSMENT_RECORD, {
                "conceptId": a.concept_id,
                "questionId": a.question_id,
                "score": round(a.score, 12),
                "move": a.move,
                "source": a.source.value if a.source else None,
            })

    def _enter(self, phase: SessionPhase, extra: dict | None = None) -> None:
        payload = {"from": self.phase.value, "to": phase.value}
        if extra:
            payload.update(extra)
        self.phase = phase
        self._log(EventKind.PHASE_CHANGE, payload)

    # ------------------------------------------------------------------
    # lifecycle
    # ------------------------------------------------------------------

    def open(self) -> list[TutorTurn]:
        """Log the session header and deliver the lecture opening."""
        self._log(EventKind.PHASE_CHANGE, {
            "from": None,
            "to": SessionPhase.LECTURE.value,
            "studentId": self.student_id,
            "topicId": self.topic.id,
            "seed": self.seed,
            "initialCoverage": {cid: self.model.coverage(cid)
                                for cid in self.topic.concept_ids},
            "initialPresumed": sorted(
                cid for cid in self.topic.concept_ids if self.model.is_presumed(cid)),
        })
        result = lecture_step(self.topic, self.lecture, None)
        self._log_turn(result.turn)
        return [result.turn]

    @property
    def pending_question(self) -> QuestionTemplate | None:
        if self.phase == SessionPhase.LECTURE:
            return self.lecture.pending_question
        if self.phase in (SessionPhase.SCAFFOLDING_1, SessionPhase.SCAFFOLDING_2):
            return self.scaffold.pending_question
        return None

    @property
    def current_map(self) -> SkeletonMap | None:
        if self.phase in MAP_PHASES and self.map_index < len(self.maps):
            return self.maps[self.map_index]
        return None

    def uncovered_agenda(self) -> list[str]:
        return [
            cid for cid in self.topic.concept_ids
            if cid not in self.initial_skip
            and not self.model.is_presumed(cid)
            and self.model.coverage(cid) < self.config.mastery_threshold
        ]

    def progress(self) -> float:
        done = sum(
            1 for cid in self.topic.concept_ids
            if self.model.is_presumed(cid)
            or self.model.coverage(cid) >= self.config.mastery_threshold
        )
        return done / len(self.topic.concepts)

    def wrap_up_advised(self) -> bool:
        elapsed_min = (time.monotonic() - self.started_at) / 60.0
        return elapsed_min >= self.config.session_soft_limit_minutes

    # ------------------------------------------------------------------
    # advance
    # ------------------------------------------------------------------

    def advance(self, event: StudentEvent) -> AdvanceResult:
        if self.phase == SessionPhase.COMPLETE:
            raise SessionComplete(f"session {self.session_id} is complete")
        if isinstance(event, TextTurn):
            if self.phase not in TEXT_PHASES:
                raise IllegalEventForPhase(
                    f"text turn not accepted in phase {self.phase.value}")
            return self._on_text(event.text)
        if isinstance(event, (MapEntry, MapSkip)):
            if self.phase not in MAP_PHASES:
                raise IllegalEventForPhase(
                    f"map submission not accepted in phase {self.phase.value}")
            if isinstance(event, MapEntry):
                return self._on_map_entry(event.slot_id, event.answer)
            return self._on_map_skip()
        if isinstance(event, ClozeEntry):
            if self.phase != SessionPhase.CLOZE:
                raise IllegalEventForPhase(
                    f"cloze submission not accepted in phase {self.phase.value}")
            return self._on_cloze_entry(event.blank_id, event.answer)
        raise IllegalEventForPhase(f"unsupported event {event!r}")

    # --- text phases ---

    def _on_text(self, text: str) -> AdvanceResult:
        self._log(EventKind.STUDENT_UTTERANCE, {"text": text, "phase": self.phase.value})
        if self.config.basis_source in ("both", "student") and text.strip():
            self.basis.add_turn(text)

        if self.phase == SessionPhase.SUMMARY:
            return self._on_summary(text)

        act = classify(text)
        is_initiative = act.kind in (ActKind.METACOGNITIVE_DEFICIT,
                                     ActKind.REPEAT_REQUEST,
                                     ActKind.CLARIFICATION_QUESTION)
        # nonempty unclassifiable input is initiative too; a genuinely empty
        # submission counts as an empty answer and the cycle moves on
        if act.kind == ActKind.OTHER and text.strip():
            is_initiative = True
        if act.kind in (ActKind.AFFIRMATION, ActKind.NEGATION) and self.pending_question is None:
            is_initiative = True

        if is_initiative:
            concept_id = (self.pending_question.concept_id
                          if self.pending_question else None)
            context = DialogueContext(
                topic=self.topic,
                concept=self.topic.concept(concept_id) if concept_id else None,
                pending_question=self.pending_question,
                previous_turn=self.previous_turn,
                phase_hint=self.phase.value,
            )
            turn = handle_initiative(act, context)
            self._log_turn(turn)
            return AdvanceResult(turns=[turn])

        if self.phase == SessionPhase.LECTURE:
            result = lecture_step(self.topic, self.lecture, text, act,
                                  solidarity=self.solidarity)
            self._log_assessments(result.assessments)
            self._log_turn(result.turn)
            turns = [result.turn]
            if result.finished:
                self._enter(SessionPhase.SUMMARY)
                summary_turn = TutorTurn(
                    speech=[templates()["summary_request"]],
                    media_directive="clear",
                )
                self._log_turn(summary_turn)
                turns.append(summary_turn)
            return AdvanceResult(turns=turns)

        # scaffolding
        result = scaffold_step(self.topic, self.scaffold, text, act,
                               self.basis, self.model, self.solidarity, self.config)
        self._log_assessments(result.assessments)
        self._log_turn(result.turn)
        turns = [result.turn]
        if result.finished:
            turns.extend(self._after_scaffolding())
        return AdvanceResult(turns=turns)

    def _on_summary(self, text: str) -> AdvanceResult:
        presumed = frozenset(
            cid for cid in self.topic.concept_ids if self.model.is_presumed(cid)
        ) | self.initial_skip
        self.summary_result = grade_summary(text, self.topic, presumed, self.config)
        assessments = [
            Assessment(concept_id=cid, question_id="summary", score=score,
                       move="summary", source=CoverageSource.SUMMARY)
            for cid, score in self.summary_result.scores.items()
        ]
        for a in assessments:
            self.model.update(a.concept_id, a.score, CoverageSource.SUMMARY,
                              presumed_threshold=self.config.summary_coverage_threshold)
        self._log_assessments(assessments)
        self.rounds = self.summary_result.rounds

        self._enter(SessionPhase.CONCEPT_MAPS_1, {"rounds": self.rounds,
                                                  "ratio": self.summary_result.ratio})
        self.maps = generate_skeleton_maps(
            [self.topic.concept(cid) for cid in self.uncovered_agenda()],
            seed=self.seed, config=self.config)
        self.map_index = 0
        turns = []
        if self.maps:
            intro = TutorTurn(speech=[templates()["maps_intro"]])
            self._log_turn(intro)
            turns.append(intro)
        else:
            turns.extend(self._after_maps())
        return AdvanceResult(turns=turns)

    # --- concept maps ---

    def _on_map_entry(self, slot_id: str, answer: str) -> AdvanceResult:
        current = self.current_map
        if current is None:
            raise IllegalEventForPhase("no concept map awaiting entries")
        result = grade_map_entry(current, slot_id, answer)
        self._log(EventKind.TASK_SUBMISSION, {
            "type": "mapEntry", "mapId": current.map_id, "slotId": slot_id,
            "answer": answer, "accepted": result.accepted,
        })
        turns: list[TutorTurn] = []
        if result.complete:
            self.map_index += 1
            if self.current_map is not None:
                cont = TutorTurn(speech=[templates()["maps_continue"]])
                self._log_turn(cont)
                turns.append(cont)
            else:
                turns.extend(self._after_maps())
        return AdvanceResult(turns=turns, task_result=result)

    def _on_map_skip(self) -> AdvanceResult:
        current = self.current_map
        if current is None:
            raise IllegalEventForPhase("no concept map to skip")
        self._log(EventKind.TASK_SUBMISSION, {"type": "mapSkip",
                                              "mapId": current.map_id})
        self.skipped_maps.append(current.map_id)
        self.map_index += 1
        turns: list[TutorTurn] = []
        if self.current_map is not None:
            cont = TutorTurn(speech=[templates()["maps_continue"]])
            self._log_turn(cont)
            turns.append(cont)
        else:
            turns.extend(self._after_maps())
        return AdvanceResult(turns=turns)

    # --- cloze ---

    def _on_cloze_entry(self, blank_id: str, answer: str) -> AdvanceResult:
        known = {b.blank_id for b in self.cloze.blanks}
        if blank_id not in known:
            raise UnknownBlank(f"no blank {blank_id}")
        if blank_id in self.cloze_responses:
            raise BlankAlreadyFilled(f"blank {blank_id} already submitted")
        self.cloze_responses[blank_id] = answer
        self._log(EventKind.TASK_SUBMISSION, {"type": "clozeEntry",
                                              "blankId": blank_id, "answer": answer})
        if len(self.cloze_responses) < len(self.cloze.blanks):
            return AdvanceResult()

        scores = grade_cloze(self.cloze, self.cloze_responses)
        assessments = []
        for blank in self.cloze.blanks:
            score = scores[blank.blank_id]
            self.model.update(blank.concept_id, score, CoverageSource.CLOZE,
                              presumed_threshold=self.config.summary_coverage_threshold)
            assessments.append(Assessment(
                concept_id=blank.concept_id, question_id=blank.blank_id,
                score=score, move="cloze", source=CoverageSource.CLOZE))
        self._log_assessments(assessments)
        self._enter(SessionPhase.COMPLETE)
        # acknowledgment only: no per-blank correctness leaves the engine
        done = TutorTurn(speech=[templates()["session_complete"]])
        self._log_turn(done)
        return AdvanceResult(turns=[done])

    # --- phase cascades ---

    def _scaffold_phase_for_round(self) -> SessionPhase:
        return (SessionPhase.SCAFFOLDING_1
                if self.phase == SessionPhase.CONCEPT_MAPS_1
                else SessionPhase.SCAFFOLDING_2)

    def _after_maps(self) -> list[TutorTurn]:
        """All maps for the current round are resolved; start scaffolding."""
        scaffold_phase = self._scaffold_phase_for_round()
        self._enter(scaffold_phase)
        agenda = self.uncovered_agenda()
        self.scaffold = ScaffoldState(agenda=agenda)
        turns: list[TutorTurn] = []
        if agenda:
            intro = TutorTurn(speech=[templates()["scaffold_intro"]],
                              media_directive="reset")
            self._log_turn(intro)
            turns.append(intro)
            opening = scaffold_step(self.topic, self.scaffold, None, None,
                                    self.basis, self.model, self.solidarity,
                                    self.config)
            self._log_turn(opening.turn)
            turns.append(opening.turn)
        else:
            turns.extend(self._after_scaffolding())
        return turns

    def _after_scaffolding(self) -> list[TutorTurn]:
        """Scaffolding round done; second round or the closing cloze."""
        if self.phase == SessionPhase.SCAFFOLDING_1 and self.rounds == 2:
            self._enter(SessionPhase.CONCEPT_MAPS_2)
            self.maps = generate_skeleton_maps(
                [self.topic.concept(cid) for cid in self.uncovered_agenda()],
                seed=self.seed + 1, config=self.config)
            self.map_index = 0
            self.skipped_maps = []
            if self.maps:
                intro = TutorTurn(speech=[templates()["maps_intro"]],
                                  media_directive="clear")
                self._log_turn(intro)
                return [intro]
            return self._after_maps()
        return self._enter_cloze()

    def _enter_cloze(self) -> list[TutorTurn]:
        self._enter(SessionPhase.CLOZE)
        self.cloze = generate_cloze(self.topic.ideal_summary)
        self.cloze_responses = {}
        intro = TutorTurn(speech=[templates()["cloze_intro"]], media_directive="clear")
        self._log_turn(intro)
        return [intro]

    # ------------------------------------------------------------------
    # state fingerprint + replay
    # ------------------------------------------------------------------

    def state_snapshot(self) -> dict:
        return {
            "phase": self.phase.value,
            "rounds": self.rounds,
            "seed": self.seed,
            "topicId": self.topic.id,
            "studentId": self.student_id,
            "coverage": {cid: round(self.model.coverage(cid), 10)
                         for cid in self.topic.concept_ids},
            "presumed": sorted(cid for cid in self.topic.concept_ids
                               if self.model.is_presumed(cid)),
            "agenda": list(self.scaffold.agenda),
            "mapIndex": self.map_index,
            "skippedMaps": list(self.skipped_maps),
            "maps": [
                {
                    "mapId": m.map_id,
                    "filled": [s.slot_id for s in m.slots if s.filled],
                    "nodeBank": list(m.node_bank),
                    "edgeBank": list(m.edge_bank),
                }
                for m in self.maps
            ],
            "clozeResponses": dict(sorted(self.cloze_responses.items())),
            "mediaVisible": list(self.media_visible),
            "seq": self.seq,
        }

    def fingerprint(self) -> str:
        canonical = json.dumps(self.state_snapshot(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def student_event_from_log(event: SessionEvent) -> StudentEvent | None:
    """Reconstruct the student input an event recorded, if any."""
    if event.kind == EventKind.STUDENT_UTTERANCE:
        return TextTurn(event.payload["text"])
    if event.kind == EventKind.TASK_SUBMISSION:
        p = event.payload
        if p["type"] == "mapEntry":
            return MapEntry(p["slotId"], p["answer"])
        if p["type"] == "mapSkip":
            return MapSkip()
        if p["type"] == "clozeEntry":
            return ClozeEntry(p["blankId"], p["answer"])
    return None


def load_event_log(path: Path) -> list[SessionEvent]:
    events = []
    for line in path.read_text("utf-8").splitlines():
        if not line.strip():
            continue
        d = json.loads(line)
        events.append(SessionEvent(seq=d["seq"], timestamp=d["timestamp"],
                                   kind=EventKind(d["kind"]), payload=d["payload"]))
    return events


def replay_session(
    curriculum: Curriculum,
    events: list[SessionEvent],
    config: EngineConfig = DEFAULT_CONFIG,
) -> Session:
    """Re-drive a fresh session from a recorded event log.

    Uses the header event's seed and initial student state, then replays
    every recorded student input through advance. Determinism of every
    module (given the seed) makes the result state-identical to the
    original session.
    """
    if not events or events[0].kind != EventKind.PHASE_CHANGE:
        raise ValueError("event log must start with the session header")
    head = events[0].payload
    topic = curriculum.topic(head["topicId"])
    if topic is None:
        raise UnknownTopic(head["topicId"])
    model = StudentModel(student_id=head["studentId"])
    for cid, cov in head.get("initialCoverage", {}).items():
        model.mastery(cid).coverage = cov
    for cid in head.get("initialPresumed", []):
        model.mastery(cid).presumed_covered = True
    session = Session(
        session_id=f"replay-{uuid.uuid4().hex[:8]}",
        student_id=head["studentId"],
        topic=topic,
        model=model,
        seed=head["seed"],
        config=config,
        log_path=None,
    )
    session.open()
    for event in events:
        student_event = student_event_from_log(event)
        if student_event is not None:
            session.advance(student_event)
    return session


# ---------------------------------------------------------------------------
# manager
# ---------------------------------------------------------------------------

class SessionManager:
    """Holds open sessions, per-session locks, and per-student snapshots.

    Many sessions may run concurrently; within one session at most one
    advance is in flight, and a losing concurrent submission gets a
    SessionConflict instead of queueing.
    """

    def __init__(
        self,
        curriculum: Curriculum,
        data_dir: Path | None = None,
        config: EngineConfig = DEFAULT_CONFIG,
    ):
        self.curriculum = curriculum
        self.config = config
        self.data_dir = Path(data_dir) if data_dir else None
        if self.data_dir:
            (self.data_dir / "sessions").mkdir(parents=True, exist_ok=True)
            (self.data_dir / "students").mkdir(parents=True, exist_ok=True)
        self.sessions: dict[str, Session] = {}
        self.open_pairs: dict[tuple[str, str], str] = {}
        self.locks: dict[str, threading.Lock] = {}
        self.models: dict[str, StudentModel] = {}
        self._registry_lock = threading.Lock()

    # --- student snapshots ---

    def student_model(self, student_id: str) -> StudentModel:
        if student_id in self.models:
            return self.models[student_id]
        if self.data_dir:
            snapshot = self.data_dir / "students" / f"{student_id}.json"
            if snapshot.exists():
                model = StudentModel.from_dict(json.loads(snapshot.read_text("utf-8")))
                self.models[student_id] = model
                return model
        model = StudentModel(student_id=student_id)
        self.models[student_id] = model
        return model

    def save_student(self, model: StudentModel) -> None:
        if not self.data_dir:
            return
        snapshot = self.data_dir / "students" / f"{model.student_id}.json"
        snapshot.write_text(json.dumps(model.to_dict(), indent=2), encoding="utf-8")

    # --- lifecycle ---

    def start_session(self, student_id: str, topic_id: str,
                      seed: int | None = None) -> tuple[Session, list[TutorTurn]]:
        topic = self.curriculum.topic(topic_id)
        if topic is None:
            raise UnknownTopic(f"no topic {topic_id}")
        with self._registry_lock:
            pair = (student_id, topic_id)
            open_id = self.open_pairs.get(pair)
            if open_id and self.sessions[open_id].phase != SessionPhase.COMPLETE:
                raise SessionAlreadyOpen(
                    f"student {student_id} already has an open session on {topic_id}")
            session_id = uuid.uuid4().hex[:12]
            if seed is None:
                seed = int.from_bytes(uuid.uuid4().bytes[:4], "big")
            log_path = (self.data_dir / "sessions" / f"{session_id}.jsonl"
                        if self.data_dir else None)
            session = Session(
                session_id=session_id,
                student_id=student_id,
                topic=topic,
                model=self.student_model(student_id),
                seed=seed,
                config=self.config,
                log_path=log_path,
            )
            self.sessions[session_id] = session
            self.open_pairs[pair] = session_id
            self.locks[session_id] = threading.Lock()
        turns = session.open()
        return session, turns

    def get(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise UnknownSession(f"no session {session_id}")
        return session

    def advance(self, session_id: str, event: StudentEvent) -> AdvanceResult:
        session = self.get(session_id)
        lock = self.locks[session_id]
        if not lock.acquire(blocking=False):
            raise SessionConflict(f"session {session_id} has a submission in flight")
        try:
            result = session.advance(event)
            if session.phase == SessionPhase.COMPLETE:
                self.save_student(session.model)
            return result
        finally:
            lock.release()
