"""Simulated students that drive the HTTP API end to end.

Policies speak only through the same /v1 surface the UI uses: answers
come from curriculum knowledge the simulated student "has in their
head", never from engine internals. Episodes are deterministic given
(policy, seed), which makes transcript hashes stable.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from fastapi.testclient import TestClient

from .config import DEFAULT_CONFIG, EngineConfig
from .curriculum import Curriculum, Topic, bundled_curriculum_dir, load_curriculum
from .service import create_app

MAX_EPISODE_STEPS = 1500


class PolicyError(ValueError):
    pass


@dataclass
class StudentPolicy:
    """Base policy: answers, summary text, and task behavior."""
    name: str
    seed: int = 0

    def summary(self, topic: Topic) -> str:
        raise NotImplementedError

    def answer(self, expected: str) -> str:
        raise NotImplementedError

    def solve_maps(self) -> bool:
        """Whether to work the current concept map (else skip it)."""
        raise NotImplementedError

    def cloze_answer(self, key: str) -> str:
        raise NotImplementedError


def _verbatim_summary(topic: Topic, k: int) -> str:
    return " ".join(topic.concepts[i].statement for i in range(k))


@dataclass
class PerfectPolicy(StudentPolicy):
    name: str = "perfect"

    def summary(self, topic: Topic) -> str:
        # enough for a single round, but leaving concepts to scaffold
        k = len(topic.concepts) // 3 + 1
        return _verbatim_summary(topic, k)

    def answer(self, expected: str) -> str:
        return expected

    def solve_maps(self) -> bool:
        return True

    def cloze_answer(self, key: str) -> str:
        return key


@dataclass
class IgnorantPolicy(StudentPolicy):
    name: str = "ignorant"

    def summary(self, topic: Topic) -> str:
        return ""

    def answer(self, expected: str) -> str:
        return "I don't know"

    def solve_maps(self) -> bool:
        return False

    def cloze_answer(self, key: str) -> str:
        return ""


@dataclass
class NoisyPolicy(StudentPolicy):
    name: str = "noisy"
    p: float = 0.5
    rng: random.Random = field(default_factory=random.Random, repr=False)

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise PolicyError(f"noisy p must be in [0,1], got {self.p}")
        self.name = f"noisy:{self.p}"
        self.rng = random.Random(self.seed)

    def summary(self, topic: Topic) -> str:
        kept = [c.statement for c in topic.concepts if self.rng.random() < self.p]
        return " ".join(kept)

    def answer(self, expected: str) -> str:
        return expected if self.rng.random() < self.p else "I don't know"

    def solve_maps(self) -> bool:
        return self.rng.random() < self.p

    def cloze_answer(self, key: str) -> str:
        return key if self.rng.random() < self.p else ""


@dataclass
class SummaryOnlyPolicy(StudentPolicy):
    name: str = "summaryonly"
    k: int = 0

    def __post_init__(self):
        self.name = f"summaryonly:{self.k}"

    def summary(self, topic: Topic) -> str:
        if self.k > len(topic.concepts):
            raise PolicyError(
                f"summaryonly k={self.k} exceeds {len(topic.concepts)} concepts")
        return _verbatim_summary(topic, self.k)

    def answer(self, expected: str) -> str:
        return "I don't know"

    def solve_maps(self) -> bool:
        return False

    def cloze_answer(self, key: str) -> str:
        return ""


def parse_policy(spec: str, seed: int) -> StudentPolicy:
    """Parse "perfect", "ignorant", "noisy:0.7", "summaryonly:4"."""
    name, _, arg = spec.strip().lower().partition(":")
    if name == "perfect":
        return PerfectPolicy(seed=seed)
    if name == "ignorant":
        return IgnorantPolicy(seed=seed)
    if name == "noisy":
        return NoisyPolicy(seed=seed, p=float(arg or 0.5))
    if name == "summaryonly":
        return SummaryOnlyPolicy(seed=seed, k=int(arg or 1))
    raise PolicyError(f"unknown policy {spec!r}")


@dataclass
class EpisodeReport:
    policy: str
    seed: int
    topic_id: str
    session_id: str
    phase_trace: list[str]
    rounds_used: int
    turn_ratio: float
    final_coverage: dict[str, float]
    scaffold_cycles: dict[str, list[str]]  # concept -> question kinds asked
    transcript: list[dict]
    transcript_hash: str

    def to_dict(self) -> dict:
        return {
            "policy": self.policy,
            "seed": self.seed,
            "topicId": self.topic_id,
            "sessionId": self.session_id,
            "phaseTrace": self.phase_trace,
            "roundsUsed": self.rounds_used,
            "turnRatio": self.turn_ratio,
            "finalCoverage": self.final_coverage,
            "scaffoldCycles": self.scaffold_cycles,
            "transcriptHash": self.transcript_hash,
            "transcript": self.transcript,
        }


class EpisodeRunner:
    """Drives one session over HTTP (in-process ASGI by default)."""

    def __init__(self, curriculum: Curriculum, client):
        self.curriculum = curriculum
        self.client = client

    def _question_lookup(self, topic: Topic, question_id: str):
        q = topic.question(question_id)
        if q is None:
            raise PolicyError(f"question {question_id} not in curriculum")
        return q

    def run(self, topic_id: str, policy: StudentPolicy, seed: int) -> EpisodeReport:
        topic = self.curriculum.topic(topic_id)
        if topic is None:
            raise PolicyError(f"unknown topic {topic_id}")
        student_id = f"sim-{policy.name}-{seed}"
        response = self.client.post("/v1/sessions", json={
            "studentId": student_id, "topicId": topic_id, "seed": seed})
        response.raise_for_status()
        view = response.json()
        session_id = view["sessionId"]

        transcript: list[dict] = []
        phase_trace: list[str] = [view["phase"]]
        scaffold_cycles: dict[str, list[str]] = {}
        lecture_segments = 0
        lecture_student_turns = 0

        opening = self.client.get(f"/v1/sessions/{session_id}/turns").json()["turns"]
        for turn in opening:
            transcript.append({"role": "tutor", "turn": turn})
            if turn["phaseHint"] == "Lecture":
                lecture_segments += len(turn["speech"])

        # cloze keys in blank order, from the student's own study of the topic
        spans = sorted(topic.ideal_summary.concept_spans, key=lambda s: s.start)
        cloze_keys = [s.key_term for s in spans]

        for _ in range(MAX_EPISODE_STEPS):
            phase = view["phase"]
            if phase == "Complete":
                break

            if phase in ("Lecture", "Scaffolding1", "Scaffolding2"):
                question = view["pendingQuestion"]
                if question is None:
                    raise PolicyError(f"no pending question in phase {phase}")
                template = self._question_lookup(topic, question["id"])
                text = policy.answer(template.expected_answer)
                if phase in ("Scaffolding1", "Scaffolding2"):
                    scaffold_cycles.setdefault(template.concept_id, []).append(
                        question["kind"])
                body = self._post_turn(session_id, text, transcript, phase)
                if phase == "Lecture":
                    lecture_student_turns += 1
                    lecture_segments += sum(
                        len(t["speech"]) for t in body["tutorTurns"]
                        if t["phaseHint"] == "Lecture")
                view = body["view"]

            elif phase == "Summary":
                text = policy.summary(topic)
                body = self._post_turn(session_id, text, transcript, phase)
                view = body["view"]

            elif phase in ("ConceptMaps1", "ConceptMaps2"):
                view = self._work_map(session_id, policy, view, transcript)

            elif phase == "Cloze":
                blanks = view["taskPayload"]["blanks"]
                index, blank = next((i, b) for i, b in enumerate(blanks)
                                    if not b["submitted"])
                answer = policy.cloze_answer(cloze_keys[index])
                body = self._post_task(session_id,
                                       {"blankId": blank["blankId"], "answer": answer},
                                       transcript, phase)
                view = body["view"]
            else:
                raise PolicyError(f"unexpected phase {phase}")

            if view["phase"] != phase_trace[-1]:
                phase_trace.append(view["phase"])
        else:
            raise PolicyError(f"episode exceeded {MAX_EPISODE_STEPS} steps "
                              f"(stuck in {view['phase']})")

        model = self.client.get(f"/v1/sessions/{session_id}/model").json()
        final_coverage = {cid: m["coverage"]
                          for cid, m in model["perConcept"].items()}
        rounds_used = 2 if "ConceptMaps2" in phase_trace or "Scaffolding2" in phase_trace else 1
        ratio = (lecture_segments / lecture_student_turns
                 if lecture_student_turns else float(lecture_segments))
        canonical = json.dumps(transcript, sort_keys=True)
        return EpisodeReport(
            policy=policy.name,
            seed=seed,
            topic_id=topic_id,
            session_id=session_id,
            phase_trace=phase_trace,
            rounds_used=rounds_used,
            turn_ratio=ratio,
            final_coverage=final_coverage,
            scaffold_cycles=scaffold_cycles,
            transcript=transcript,
            transcript_hash=hashlib.sha256(canonical.encode()).hexdigest(),
        )

    def _post_turn(self, session_id, text, transcript, phase) -> dict:
        transcript.append({"role": "student", "phase": phase, "text": text})
        response = self.client.post(f"/v1/sessions/{session_id}/turn",
                                    json={"text": text})
        response.raise_for_status()
        body = response.json()
        for turn in body["tutorTurns"]:
            transcript.append({"role": "tutor", "turn": turn})
        return body

    def _post_task(self, session_id, payload, transcript, phase) -> dict:
        transcript.append({"role": "student", "phase": phase, "task": payload})
        response = self.client.post(f"/v1/sessions/{session_id}/task", json=payload)
        response.raise_for_status()
        body = response.json()
        for turn in body.get("tutorTurns", []):
            transcript.append({"role": "tutor", "turn": turn})
        return body

    def _work_map(self, session_id, policy, view, transcript) -> dict:
        phase = view["phase"]
        if not policy.solve_maps():
            return self._post_task(session_id, {"action": "skip"}, transcript, phase)["view"]
        payload = view["taskPayload"]
        cells = [c for t in payload["triples"] for c in
                 (t["subject"], t["relation"], t["object"])]
        target = next((c for c in cells if c["blanked"] and not c["filled"]), None)
        if target is None:
            return self._post_task(session_id, {"action": "skip"}, transcript, phase)["view"]
        bank = payload["nodeBank"] if target["role"] == "node" else payload["edgeBank"]
        body = None
        for candidate in bank:
            body = self._post_task(
                session_id, {"slotId": target["slotId"], "answer": candidate},
                transcript, phase)
            if body.get("accepted"):
                break
        if body is None or not body.get("accepted"):
            # bank exhausted without a hit: give up on this map
            return self._post_task(session_id, {"action": "skip"}, transcript, phase)["view"]
        return body["view"]


def run_episode(
    topic_id: str,
    policy: StudentPolicy | str,
    seed: int,
    curriculum_dir: str | Path | None = None,
    config: EngineConfig = DEFAULT_CONFIG,
) -> EpisodeReport:
    """Spin up an in-process service and drive one full episode."""
    curriculum = load_curriculum(curriculum_dir or bundled_curriculum_dir())
    if isinstance(policy, str):
        policy = parse_policy(policy, seed)
    app = create_app(curriculum=curriculum, config=config)
    with TestClient(app) as client:
        return EpisodeRunner(curriculum, client).run(topic_id, policy, seed)
