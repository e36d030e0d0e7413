"""Engine exception hierarchy.

Every error carries a machine-readable ``code`` (mirrored in API error
bodies) and the HTTP status the service layer maps it to.
"""

from __future__ import annotations


class EngineError(Exception):
    code = "engine_error"
    http_status = 500

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


# --- curriculum ---

class MissingFile(EngineError):
    code = "missing_file"
    http_status = 404


class SchemaViolation(EngineError):
    code = "schema_violation"
    http_status = 422

    def __init__(self, field: str, topic_id: str, message: str = ""):
        self.field = field
        self.topic_id = topic_id
        super().__init__(message or f"{topic_id}: schema violation at {field}")


class DanglingReference(EngineError):
    code = "dangling_reference"
    http_status = 422

    def __init__(self, ref: str, message: str = ""):
        self.ref = ref
        super().__init__(message or f"dangling reference: {ref}")


# --- textmatch ---

class EmptyKeywordList(EngineError):
    code = "empty_keyword_list"
    http_status = 422


class EmptyExpectation(EngineError):
    code = "empty_expectation"
    http_status = 422


# --- retrieval / dialogue ---

class EmptyCandidates(EngineError):
    code = "empty_candidates"
    http_status = 422


class OutOfRange(EngineError):
    code = "out_of_range"
    http_status = 422


class ScriptExhausted(EngineError):
    code = "script_exhausted"
    http_status = 409


class EmptyAgenda(EngineError):
    code = "empty_agenda"
    http_status = 409


# --- tasks ---

class UnknownSlot(EngineError):
    code = "unknown_slot"
    http_status = 404


class SlotAlreadyFilled(EngineError):
    code = "slot_already_filled"
    http_status = 409


class NoSpans(EngineError):
    code = "no_spans"
    http_status = 422


class UnknownBlank(EngineError):
    code = "unknown_blank"
    http_status = 404


class BlankAlreadyFilled(EngineError):
    code = "blank_already_filled"
    http_status = 409


# --- session ---

class UnknownTopic(EngineError):
    code = "unknown_topic"
    http_status = 404


class UnknownSession(EngineError):
    code = "unknown_session"
    http_status = 404


class SessionAlreadyOpen(EngineError):
    code = "session_already_open"
    http_status = 409


class IllegalEventForPhase(EngineError):
    code = "illegal_event_for_phase"
    http_status = 422


class SessionComplete(EngineError):
    code = "session_complete"
    http_status = 410


class SessionConflict(EngineError):
    """Second in-flight submission for the same session."""
    code = "conflict"
    http_status = 409


class IllegalSource(EngineError):
    code = "illegal_source"
    http_status = 422


# --- testbank ---

class InsufficientItems(EngineError):
    code = "insufficient_items"
    http_status = 422

    def __init__(self, topic_id: str, have: int, need: int):
        self.topic_id = topic_id
        self.have = have
        self.need = need
        super().__init__(f"topic {topic_id}: have {have} items, need {need}")


class UnknownItem(EngineError):
    code = "unknown_item"
    http_status = 404


class UnknownTest(EngineError):
    code = "unknown_test"
    http_status = 404


# --- analytics ---

class NonPositiveOR(EngineError):
    code = "non_positive_odds_ratio"
    http_status = 422


class SingularDesign(EngineError):
    code = "singular_design"
    http_status = 422


class Separation(EngineError):
    code = "separation"
    http_status = 422


class IoFailure(EngineError):
    code = "io_failure"
    http_status = 500
