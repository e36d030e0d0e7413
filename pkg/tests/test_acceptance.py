"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line with its measured result."""

import json
import random
import string
import time
from collections import Counter

import numpy as np
import pytest

from tutorengine.analytics import fit_logistic, or_to_d
from tutorengine.commonground import DialogueBasis
from tutorengine.curriculum import bundled_curriculum_dir, load_curriculum
from tutorengine.session import (
    ClozeEntry,
    MapEntry,
    MapSkip,
    SessionManager,
    SessionPhase,
    TextTurn,
    load_event_log,
    replay_session,
)
from tutorengine.simstudent import (
    IgnorantPolicy,
    PerfectPolicy,
    SummaryOnlyPolicy,
    run_episode,
)
from tutorengine.tasks import generate_cloze, generate_skeleton_maps, reconstruct_cloze
from tutorengine.testbank import (
    assemble_delayed_test,
    assemble_immediate_tests,
    bundled_item_bank_path,
    load_item_bank,
)
from tutorengine.textmatch import assess, cosine, edit_distance, term_vector

from tests.test_textmatch import dp_edit_distance


def report(line: str, ok: bool = True) -> None:
    print(f"\nACCEPTANCE {'PASS' if ok else 'FAIL'}: {line}")
    assert ok, line


@pytest.fixture(scope="module")
def curriculum():
    return load_curriculum(bundled_curriculum_dir())


@pytest.fixture(scope="module")
def perfect_episode():
    return run_episode("protein_function", PerfectPolicy(), seed=2001)


@pytest.fixture(scope="module")
def ignorant_episode():
    return run_episode("protein_function", IgnorantPolicy(), seed=2002)


PRINTED_PAIRS = [
    (3.13, 0.71), (2.90, 0.66), (2.24, 0.50), (2.04, 0.44), (2.04, 0.45),
    (2.11, 0.47), (1.77, 0.36), (1.86, 0.39), (0.56, -0.35), (0.63, -0.27),
    (0.62, -0.30),
]


def test_criterion_or_to_d_suite():
    """All 11 printed (OR, d) pairs reproduced within +/-0.03, under 1s."""
    start = time.perf_counter()
    worst = 0.0
    for odds_ratio, expected in PRINTED_PAIRS:
        got = or_to_d(odds_ratio, "paper")
        worst = max(worst, abs(got - expected))
        assert got == pytest.approx(expected, abs=0.03), (odds_ratio, expected, got)
    elapsed = time.perf_counter() - start
    report(f"OR->d suite: 11/11 pairs within ±0.03 (worst |Δ|={worst:.4f}, "
           f"{elapsed * 1000:.1f} ms)", ok=elapsed < 1.0)


def test_criterion_session_structure(ignorant_episode):
    """Ignorant -> 2 rounds; SummaryOnly(4) -> 1 round; ratio 1/3 -> 2 rounds."""
    t0 = time.perf_counter()
    assert ignorant_episode.rounds_used == 2
    assert "ConceptMaps2" in ignorant_episode.phase_trace
    assert "Scaffolding2" in ignorant_episode.phase_trace

    summary4 = run_episode("protein_function", SummaryOnlyPolicy(k=4), seed=2003)
    assert summary4.rounds_used == 1

    boundary = run_episode("carbohydrate_function", SummaryOnlyPolicy(k=2), seed=2004)
    assert boundary.rounds_used == 2  # ratio exactly 1/3 schedules two rounds
    elapsed = time.perf_counter() - t0
    report(f"session structure: ignorant=2 rounds, summaryonly(4)=1 round, "
           f"boundary 1/3=2 rounds ({elapsed:.1f}s for 2 episodes)",
           ok=elapsed < 20.0)


def test_criterion_scaffold_cycles(perfect_episode, ignorant_episode):
    """Perfect: every cycle Prompt->Feedback; Ignorant: full 4-move cycles."""
    perfect = perfect_episode.scaffold_cycles
    assert perfect and all(kinds == ["Prompt"] for kinds in perfect.values())
    ignorant = ignorant_episode.scaffold_cycles
    assert len(ignorant) == 11
    assert all(kinds == ["Prompt", "Verification", "Prompt", "Verification"]
               for kinds in ignorant.values())
    report(f"scaffold cycles: perfect={len(perfect)} two-move cycles, "
           f"ignorant={len(ignorant)} concepts with full 4-move cycles x2 rounds")


def test_criterion_turn_ratio(perfect_episode):
    """Compliant lecture policy lands in the 3:1 band [2.5, 3.5]."""
    ratio = perfect_episode.turn_ratio
    report(f"lecture turn ratio {ratio:.2f} within [2.5, 3.5]",
           ok=2.5 <= ratio <= 3.5)


def test_criterion_text_math_oracles():
    """Edit distance vs brute force on 10,000 pairs; Gram matrix at identity
    within 1e-9 after 200 insertions; cosine/assess bounds + invariance."""
    rng = random.Random(31337)
    alphabet = string.ascii_lowercase[:8]
    for _ in range(10_000):
        a = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 12)))
        b = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 12)))
        assert edit_distance(a, b) == dp_edit_distance(a, b), (a, b)

    words = [f"term{i}" for i in range(17)]
    basis = DialogueBasis()
    for _ in range(200):
        basis.add_turn(" ".join(rng.choice(words)
                                for _ in range(rng.randint(1, 9))))
    gram = basis.gram_matrix()
    gram_err = float(np.abs(gram - np.eye(gram.shape[0])).max())
    assert gram_err < 1e-9

    for _ in range(300):
        u = {rng.choice(words): rng.random() + 0.05 for _ in range(rng.randint(1, 5))}
        v = {rng.choice(words): rng.random() + 0.05 for _ in range(rng.randint(1, 5))}
        c = cosine(u, v)
        assert 0.0 <= c <= 1.0
        assert basis.projection_coverage(u) <= 1.0 + 1e-9
    nonzero = term_vector("proteins build muscle")
    assert cosine(nonzero, nonzero) == pytest.approx(1.0)

    base = assess("Proteins build muscle", "proteins build muscle",
                  ["proteins", "muscle"])
    mangled = assess("PROTEINS, build... MUSCLE!!", "proteins build muscle",
                     ["proteins", "muscle"])
    assert mangled.value == pytest.approx(base.value)
    assert base.value == pytest.approx(max(base.cosine_component,
                                           base.keyword_component))
    report(f"text-math oracles: 10,000 edit-distance pairs exact, "
           f"Gram deviation {gram_err:.2e} < 1e-9, bounds and invariance hold")


def test_criterion_task_invariants(curriculum):
    """Map partition/bank conservation over 1,000 seeds; cloze identity."""
    topic = curriculum.topic("protein_function")
    concepts = list(topic.concepts)
    input_triples = Counter(t for c in concepts for t in c.triples)
    for seed in range(1000):
        maps = generate_skeleton_maps(concepts, seed=seed)
        assert Counter(t for m in maps for t in m.triples) == input_triples
        for m in maps:
            assert len(m.triples) <= 4
            blanked = [s for s in m.slots if s.blanked]
            assert blanked
            assert Counter(m.node_bank) == Counter(
                s.answer for s in blanked if s.role == "node")
            assert Counter(m.edge_bank) == Counter(
                s.answer for s in blanked if s.role == "edge")

    for t in curriculum.topics.values():
        cloze = generate_cloze(t.ideal_summary)
        rebuilt = reconstruct_cloze(cloze, [b.key for b in cloze.blanks])
        assert rebuilt == t.ideal_summary.passage, t.id
    report("task invariants: 1,000 seeded map generations conserve "
           "triples/banks/blanks (≤4 triples per map); cloze reconstruction "
           f"byte-identical for {len(curriculum.topics)} bundled topics")


def test_criterion_test_assembly():
    """Immediate 12-item 6/6 with pre∩post=∅ and delayed 48-item 24/24,
    across 1,000 seeds."""
    bank = load_item_bank(bundled_item_bank_path())
    topics = ["protein_function", "carbohydrate_function",
              "enzyme_reactions", "lipid_structure"]
    seen = set()
    for topic in topics:
        seen.update(i.item_id for i in bank.by_topic(topic)[:6])
    for seed in range(1000):
        pre, post = assemble_immediate_tests(bank, topics[0], topics[1], seed=seed)
        assert len(pre.items) == 12 and len(post.items) == 12
        assert set(pre.items).isdisjoint(post.items)
        for test in (pre, post):
            counts = Counter(bank.item(i).topic_id for i in test.items)
            assert counts[topics[0]] == 6 and counts[topics[1]] == 6

        delayed = assemble_delayed_test(bank, topics, seen, seed=seed)
        assert len(delayed.items) == 48
        assert len(set(delayed.items)) == 48
        assert sum(1 for i in delayed.items if i in seen) == 24
    report("test assembly: 1,000 seeds x (12-item 6/6 split, pre∩post=∅; "
           "48-item delayed 24 seen/24 new)")


def test_criterion_logistic_fitter():
    """Intercept-only equals logit(mean) within 1e-6; two-coefficient fit
    matches the grid-search oracle within 1e-3; log-likelihood monotone."""
    import math

    from tutorengine.analytics import ItemResponseRecord, design_matrix

    records = ([ItemResponseRecord(f"p{i}", f"i{i}", "ITS", "Post", True)
                for i in range(64)]
               + [ItemResponseRecord(f"p{i}", f"w{i}", "ITS", "Post", False)
                  for i in range(36)])
    fit = fit_logistic(records, design="1")
    intercept_err = abs(fit.coefficients["(Intercept)"] - math.log(0.64 / 0.36))
    assert fit.converged and intercept_err < 1e-6

    two_cell = ([ItemResponseRecord(f"p{i}", f"a{i}", "Class", "Pre", i < 30)
                 for i in range(80)]
                + [ItemResponseRecord(f"p{i}", f"b{i}", "Human", "Pre", i < 55)
                   for i in range(80)])
    fit2 = fit_logistic(two_cell, design="condition")
    X, y, names = design_matrix(two_cell, design="condition")
    assert names == ["(Intercept)", "condition[Human]"]

    def ll(b0, b1):
        eta = b0 * X[:, 0] + b1 * X[:, 1]
        return float(np.sum(y * eta - np.logaddexp(0.0, eta)))

    center, width = (0.0, 0.0), 4.0
    for _ in range(8):
        b0s = np.linspace(center[0] - width, center[0] + width, 41)
        b1s = np.linspace(center[1] - width, center[1] + width, 41)
        _, g0, g1 = max(((ll(b0, b1), b0, b1) for b0 in b0s for b1 in b1s),
                        key=lambda t: t[0])
        center, width = (g0, g1), width / 10
    grid_err = max(abs(fit2.coefficients["(Intercept)"] - center[0]),
                   abs(fit2.coefficients["condition[Human]"] - center[1]))
    assert grid_err < 1e-3

    import tutorengine.analytics as analytics_module
    lls = []
    original = analytics_module.MAX_ITERATIONS
    try:
        for cap in range(1, 10):
            analytics_module.MAX_ITERATIONS = cap
            lls.append(fit_logistic(two_cell, design="condition").log_likelihood)
    finally:
        analytics_module.MAX_ITERATIONS = original
    assert all(b >= a - 1e-9 for a, b in zip(lls, lls[1:]))
    report(f"logistic fitter: intercept err {intercept_err:.2e} < 1e-6, "
           f"grid-oracle err {grid_err:.2e} < 1e-3, log-likelihood monotone "
           f"over {len(lls)} iteration caps")


def _random_episode(manager, curriculum, rng, index):
    """Drive one randomized session straight through the state machine."""
    topic_id = rng.choice(list(curriculum.topics))
    topic = curriculum.topic(topic_id)
    student = f"rand-{index}"
    session, _ = manager.start_session(student, topic_id, seed=rng.randrange(10 ** 9))
    utterances = ["i dont know", "can you repeat that", "I don't understand",
                  "what do you mean", "yes", "no", "proteins build muscle",
                  "enzymes", ""]

    guard = 0
    while session.phase != SessionPhase.COMPLETE:
        guard += 1
        assert guard < 600, f"episode stuck in {session.phase}"
        if session.phase in (SessionPhase.LECTURE, SessionPhase.SCAFFOLDING_1,
                             SessionPhase.SCAFFOLDING_2):
            if rng.random() < 0.5 and session.pending_question is not None:
                q = topic.question(session.pending_question.id)
                manager.advance(session.session_id, TextTurn(q.expected_answer))
            else:
                manager.advance(session.session_id,
                                TextTurn(rng.choice(utterances)))
        elif session.phase == SessionPhase.SUMMARY:
            k = rng.randrange(len(topic.concepts) + 1)
            summary = " ".join(c.statement for c in topic.concepts[:k])
            manager.advance(session.session_id, TextTurn(summary))
        elif session.phase in (SessionPhase.CONCEPT_MAPS_1,
                               SessionPhase.CONCEPT_MAPS_2):
            current = session.current_map
            open_slots = [s for s in current.slots if s.blanked and not s.filled]
            if rng.random() < 0.6 and open_slots:
                slot = rng.choice(open_slots)
                answer = slot.answer if rng.random() < 0.7 else "wrong guess"
                manager.advance(session.session_id,
                                MapEntry(slot.slot_id, answer))
            else:
                manager.advance(session.session_id, MapSkip())
        elif session.phase == SessionPhase.CLOZE:
            blank = next(b for b in session.cloze.blanks
                         if b.blank_id not in session.cloze_responses)
            answer = blank.key if rng.random() < 0.5 else rng.choice(["", "wrong"])
            manager.advance(session.session_id,
                            ClozeEntry(blank.blank_id, answer))
    return session


def test_criterion_event_log_replay(tmp_path, curriculum):
    """Replay reproduces the final state hash for 50 randomized episodes."""
    manager = SessionManager(curriculum, data_dir=tmp_path)
    rng = random.Random(424242)
    checked = 0
    for index in range(50):
        session = _random_episode(manager, curriculum, rng, index)
        log_path = tmp_path / "sessions" / f"{session.session_id}.jsonl"
        events = load_event_log(log_path)
        replayed = replay_session(curriculum, events)
        assert replayed.fingerprint() == session.fingerprint(), (
            f"episode {index}: replay hash mismatch")
        checked += 1
    report(f"event-log replay: {checked}/50 randomized episodes hash-equal")
