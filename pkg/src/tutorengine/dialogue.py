"""The three dialogue models: collaborative lecture, scaffolding, and the
general cross-context model for feedback and student initiative.

The lecture walks an authored script, one block per concept, each block
interleaving tutor content segments with exactly one student response
slot. Scaffolding runs a Prompt -> Feedback -> Verification Question ->
Feedback cycle per uncovered concept, cut short the moment the student
demonstrates understanding. The general model answers repeat requests,
re-explains on metacognitive complaints, and keeps pending questions
alive across interruptions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from importlib import resources

from .commonground import DialogueBasis, in_common_ground, select_question
from .config import DEFAULT_CONFIG, EngineConfig
from .curriculum import Concept, QuestionKind, QuestionTemplate, Topic
from .errors import EmptyAgenda, OutOfRange, ScriptExhausted
from .speechact import ActKind, SpeechAct
from .student import CoverageSource, StudentModel
from .textmatch import assess, content_terms


class FeedbackLevel(str, Enum):
    NEGATIVE = "Negative"
    NEGATIVE_NEUTRAL = "NegativeNeutral"
    NEUTRAL = "Neutral"
    POSITIVE_NEUTRAL = "PositiveNeutral"
    POSITIVE = "Positive"


def feedback_level(score: float) -> FeedbackLevel:
    """Map an assessment in [0,1] onto the five feedback levels (equal bins)."""
    if not 0.0 <= score <= 1.0:
        raise OutOfRange(f"score {score} outside [0, 1]")
    if score < 0.2:
        return FeedbackLevel.NEGATIVE
    if score < 0.4:
        return FeedbackLevel.NEGATIVE_NEUTRAL
    if score < 0.6:
        return FeedbackLevel.NEUTRAL
    if score < 0.8:
        return FeedbackLevel.POSITIVE_NEUTRAL
    return FeedbackLevel.POSITIVE


@lru_cache(maxsize=1)
def templates() -> dict[str, str]:
    raw = resources.files("tutorengine.resources").joinpath("templates.txt").read_text("utf-8")
    out = {}
    for line in raw.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, text = line.partition("\t")
        out[key] = text
    return out


@lru_cache(maxsize=1)
def solidarity_statements() -> tuple[str, ...]:
    raw = resources.files("tutorengine.resources").joinpath("solidarity.txt").read_text("utf-8")
    return tuple(l.strip() for l in raw.splitlines() if l.strip() and not l.startswith("#"))


class SolidarityPicker:
    """Round-robin over the shipped solidarity list."""

    def __init__(self, start: int = 0):
        self.index = start

    def next(self) -> str:
        statements = solidarity_statements()
        statement = statements[self.index % len(statements)]
        self.index += 1
        return statement


@dataclass
class TutorTurn:
    speech: list[str] = field(default_factory=list)
    feedback: FeedbackLevel | None = None
    solidarity: str | None = None
    question: QuestionTemplate | None = None
    media_reveals: list[str] = field(default_factory=list)
    media_directive: str | None = None  # "clear" | "reset"
    phase_hint: str = ""


@dataclass(frozen=True)
class Assessment:
    """One scored student answer, for the event log and coverage updates.

    source None means the score is feedback-only (lecture answers are
    never coverage evidence).
    """
    concept_id: str
    question_id: str
    score: float
    move: str  # "lecture" | "prompt" | "vq" | "summary" | "cloze"
    source: CoverageSource | None


def generate_preview(concept: Concept, topic: Topic | None = None) -> str:
    """Deterministic preview line for a concept outside the common ground.

    Falls back to the topic name when the concept has no focus phrase.
    """
    focus = concept.focus.strip()
    if not focus and topic is not None:
        focus = topic.name.strip()
    if not focus:
        focus = concept.statement.rstrip(".")
    return templates()["preview"].format(focus=focus)


def answer_keywords(question: QuestionTemplate, concept: Concept) -> list[str]:
    """Keyword channel terms for a question: concept keywords plus the
    content words of the expected answer."""
    terms = list(concept.keywords)
    for term in content_terms(question.expected_answer):
        if term not in terms:
            terms.append(term)
    return terms


def score_answer(text: str, act: SpeechAct, question: QuestionTemplate,
                 concept: Concept) -> float:
    """Score a student answer against a question's expectation.

    Verification questions score 1.0 when the speech act (yes/no) matches
    the expected class; free-text answers to them fall back to text
    assessment. Other kinds are assessed on both channels.
    """
    if question.kind == QuestionKind.VERIFICATION:
        expected_yes = question.expected_answer.strip().lower() == "yes"
        if act.kind == ActKind.AFFIRMATION:
            return 1.0 if expected_yes else 0.0
        if act.kind == ActKind.NEGATION:
            return 0.0 if expected_yes else 1.0
        return assess(text, question.expected_answer,
                      [question.expected_answer]).value
    return assess(text, question.expected_answer,
                  answer_keywords(question, concept)).value


# ---------------------------------------------------------------------------
# Collaborative Lecture
# ---------------------------------------------------------------------------

@dataclass
class LectureState:
    next_block: int = 0
    pending_question: QuestionTemplate | None = None

    @property
    def started(self) -> bool:
        return self.next_block > 0 or self.pending_question is not None

    def finished(self, topic: Topic) -> bool:
        return self.pending_question is None and self.next_block >= len(topic.lecture_script)


@dataclass
class StepResult:
    turn: TutorTurn
    assessments: list[Assessment] = field(default_factory=list)
    finished: bool = False


def _emit_block(topic: Topic, state: LectureState, turn: TutorTurn) -> None:
    block = topic.lecture_script[state.next_block]
    turn.speech.extend(block.segments)
    turn.media_reveals.extend(block.media_reveals)
    turn.question = block.question
    state.pending_question = block.question
    state.next_block += 1


def lecture_step(
    topic: Topic,
    state: LectureState,
    student_input: str | None,
    act: SpeechAct | None = None,
    solidarity: SolidarityPicker | None = None,
) -> StepResult:
    """Advance the collaborative lecture by one move.

    With no input and a fresh state, emits the topic preview plus the
    first block. With an answer to the pending question, scores it (except
    comprehension gauging, which is never assessed), attaches feedback,
    and emits the next block. Lecture answers inform feedback only; they
    are not coverage evidence.
    """
    turn = TutorTurn(phase_hint="Lecture")
    result = StepResult(turn=turn)

    if not state.started:
        turn.speech.append(topic.preview)
        _emit_block(topic, state, turn)
        return result

    if state.pending_question is None:
        raise ScriptExhausted(f"lecture over for topic {topic.id}")

    question = state.pending_question
    concept = topic.concept(question.concept_id)
    if question.kind != QuestionKind.COMPREHENSION_GAUGING:
        score = score_answer(student_input or "", act or SpeechAct(ActKind.ANSWER, 1.0),
                             question, concept)
        turn.feedback = feedback_level(score)
        if turn.feedback == FeedbackLevel.NEGATIVE:
            turn.solidarity = (solidarity or SolidarityPicker()).next()
        result.assessments.append(Assessment(
            concept_id=concept.id, question_id=question.id, score=score,
            move="lecture", source=None))
    state.pending_question = None

    if state.next_block < len(topic.lecture_script):
        _emit_block(topic, state, turn)
    else:
        result.finished = True
    return result


# ---------------------------------------------------------------------------
# Scaffolding
# ---------------------------------------------------------------------------

class CycleStep(str, Enum):
    AWAIT_PROMPT = "AwaitPrompt"
    AWAIT_PROMPT_ANSWER = "AwaitPromptAnswer"
    AWAIT_VQ = "AwaitVQ"
    AWAIT_VQ_ANSWER = "AwaitVQAnswer"
    DONE = "Done"


@dataclass
class ScaffoldCycleState:
    concept_id: str
    step: CycleStep = CycleStep.AWAIT_PROMPT


@dataclass
class ScaffoldState:
    agenda: list[str] = field(default_factory=list)
    cycle: ScaffoldCycleState | None = None
    pending_question: QuestionTemplate | None = None

    @property
    def done(self) -> bool:
        return not self.agenda and self.cycle is None


def _begin_cycle(
    topic: Topic,
    state: ScaffoldState,
    basis: DialogueBasis,
    model: StudentModel,
    turn: TutorTurn,
    config: EngineConfig,
) -> None:
    """Open the next cycle: preview if off the common ground, then prompt."""
    if not state.agenda:
        raise EmptyAgenda("no uncovered concepts left to scaffold")
    candidates = [q for cid in state.agenda for q in topic.concept(cid).prompts]
    prompt = select_question(candidates, model, basis)
    concept = topic.concept(prompt.concept_id)
    state.cycle = ScaffoldCycleState(concept_id=concept.id,
                                     step=CycleStep.AWAIT_PROMPT_ANSWER)
    if not in_common_ground(basis, concept, config):
        turn.speech.append(generate_preview(concept, topic))
    turn.question = prompt
    state.pending_question = prompt


def _close_cycle(state: ScaffoldState) -> None:
    state.agenda.remove(state.cycle.concept_id)
    state.cycle = None
    state.pending_question = None


def scaffold_step(
    topic: Topic,
    state: ScaffoldState,
    student_input: str | None,
    act: SpeechAct | None,
    basis: DialogueBasis,
    model: StudentModel,
    solidarity: SolidarityPicker,
    config: EngineConfig = DEFAULT_CONFIG,
) -> StepResult:
    """Advance scaffolding by one move.

    Cycle shape per concept, at most once per round:
    Prompt -> Feedback [-> Verification Question -> Feedback]. Mastery at
    the prompt ends the cycle after two moves; otherwise one verification
    question follows, and the cycle ends after its feedback regardless,
    recording residual coverage. Media for mastered concepts is revealed
    in the same turn and persists for the rest of scaffolding.
    """
    turn = TutorTurn(phase_hint="Scaffolding")
    result = StepResult(turn=turn)

    if state.cycle is None:
        _begin_cycle(topic, state, basis, model, turn, config)
        return result

    cycle = state.cycle
    question = state.pending_question
    concept = topic.concept(cycle.concept_id)
    score = score_answer(student_input or "", act or SpeechAct(ActKind.ANSWER, 1.0),
                         question, concept)
    move = "vq" if cycle.step == CycleStep.AWAIT_VQ_ANSWER else "prompt"
    model.update(concept.id, score, CoverageSource.SCAFFOLD,
                 presumed_threshold=config.summary_coverage_threshold)
    result.assessments.append(Assessment(
        concept_id=concept.id, question_id=question.id, score=score,
        move=move, source=CoverageSource.SCAFFOLD))

    turn.feedback = feedback_level(score)
    if turn.feedback == FeedbackLevel.NEGATIVE:
        turn.solidarity = solidarity.next()

    mastered = score >= config.mastery_threshold
    if mastered:
        turn.media_reveals.extend(concept.media_refs)

    if cycle.step == CycleStep.AWAIT_PROMPT_ANSWER and not mastered:
        vq = select_question(list(concept.verification_questions), model, basis)
        cycle.step = CycleStep.AWAIT_VQ_ANSWER
        turn.question = vq
        state.pending_question = vq
        return result

    # mastery at either step, or the VQ answer arriving: cycle over
    cycle.step = CycleStep.DONE
    _close_cycle(state)
    if state.agenda:
        _begin_cycle(topic, state, basis, model, turn, config)
    else:
        result.finished = True
    return result


# ---------------------------------------------------------------------------
# General model: student initiative
# ---------------------------------------------------------------------------

@dataclass
class DialogueContext:
    topic: Topic
    concept: Concept | None
    pending_question: QuestionTemplate | None
    previous_turn: TutorTurn | None
    phase_hint: str = ""


def handle_initiative(act: SpeechAct, context: DialogueContext) -> TutorTurn:
    """Respond to non-answer student moves without advancing any phase."""
    assert act.kind != ActKind.ANSWER
    turn = TutorTurn(phase_hint=context.phase_hint)
    statement = (context.concept.statement if context.concept
                 else context.topic.preview)

    if act.kind == ActKind.REPEAT_REQUEST and context.previous_turn is not None:
        turn.speech = list(context.previous_turn.speech)
        turn.question = context.pending_question
        return turn

    if act.kind == ActKind.METACOGNITIVE_DEFICIT:
        turn.speech.append(templates()["reexplain"].format(statement=statement))
        turn.question = context.pending_question
        return turn

    if act.kind == ActKind.CLARIFICATION_QUESTION:
        turn.speech.append(templates()["clarify_answer"].format(statement=statement))
        turn.question = context.pending_question
        return turn

    if act.kind in (ActKind.AFFIRMATION, ActKind.NEGATION) and context.pending_question is None:
        turn.speech.append(templates()["neutral_ack"])
        return turn

    # Other, or anything unexpected: neutral re-prompt
    if context.pending_question is not None:
        turn.speech.append(templates()["reprompt"].format(
            question=context.pending_question.text))
        turn.question = context.pending_question
    else:
        turn.speech.append(templates()["neutral_ack"])
    return turn
