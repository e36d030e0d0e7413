import json

import pytest

from tutorengine.curriculum import (
    Concept,
    ConceptTriple,
    IdealSummary,
    LectureStep,
    MediaAsset,
    QuestionKind,
    QuestionTemplate,
    SummarySpan,
    Topic,
    bundled_curriculum_dir,
    load_curriculum,
    load_topic_file,
    topic_from_dict,
    topic_to_dict,
    validate_topic,
)
from tutorengine.errors import DanglingReference, MissingFile, SchemaViolation


@pytest.fixture(scope="module")
def demo():
    return load_curriculum(bundled_curriculum_dir())


def test_demo_topic_has_eleven_concepts(demo):
    topic = demo.topic("protein_function")
    assert topic is not None
    assert len(topic.concepts) == 11


def test_empty_directory_is_empty_curriculum(tmp_path):
    cur = load_curriculum(tmp_path)
    assert cur.topics == {}
    assert cur.standards == ()


def test_missing_directory_raises(tmp_path):
    with pytest.raises(MissingFile):
        load_curriculum(tmp_path / "nope")


def test_dangling_lecture_concept_reference(tmp_path, demo):
    doc = topic_to_dict(demo.topic("protein_function"))
    doc["lectureScript"][0]["conceptId"] = "c99"
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(DanglingReference) as err:
        load_topic_file(path)
    assert "c99" in str(err.value)


def test_schema_rejects_missing_fields(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"id": "t", "name": "T"}))
    with pytest.raises(SchemaViolation):
        load_topic_file(path)


def test_schema_rejects_extra_fields(tmp_path, demo):
    doc = topic_to_dict(demo.topic("carbohydrate_function"))
    doc["surprise"] = True
    path = tmp_path / "extra.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(SchemaViolation):
        load_topic_file(path)


def test_round_trip_identity(demo, tmp_path):
    for topic in demo.topics.values():
        doc = topic_to_dict(topic)
        path = tmp_path / f"{topic.id}.json"
        path.write_text(json.dumps(doc))
        reloaded = load_topic_file(path)
        assert reloaded == topic
        assert topic_to_dict(reloaded) == doc


def test_loader_output_validates_clean(demo):
    # the loader is strictly stronger than validate_topic
    for topic in demo.topics.values():
        assert validate_topic(topic) == []


def test_every_concept_reference_resolves_uniquely(demo):
    for topic in demo.topics.values():
        ids = topic.concept_ids
        assert len(set(ids)) == len(ids)
        for step in topic.lecture_script:
            assert step.concept_id in ids
        for span in topic.ideal_summary.concept_spans:
            assert span.concept_id in ids
        for q in topic.all_questions():
            assert q.concept_id in ids


def _tiny_topic(**overrides):
    concept = Concept(
        id="c1",
        statement="Proteins build muscle.",
        keywords=("proteins", "muscle"),
        triples=(ConceptTriple("proteins", "build", "muscle"),),
        prompts=(QuestionTemplate("p1", QuestionKind.PROMPT, "What do proteins build?",
                                  "muscle", "c1"),),
        verification_questions=(QuestionTemplate(
            "v1", QuestionKind.VERIFICATION, "Do proteins build muscle?", "yes", "c1"),),
        media_refs=("m1",),
    )
    concept = Concept(**{**concept.__dict__, **overrides.pop("concept", {})})
    base = dict(
        id="tiny",
        name="Tiny",
        preview="A tiny preview.",
        concepts=(concept,),
        ideal_summary=IdealSummary(
            "Proteins build muscle.",
            (SummarySpan("c1", 15, 21, "muscle"),),
        ),
        lecture_script=(LectureStep(
            "s1", "c1", ("Proteins build muscle.",),
            QuestionTemplate("l1", QuestionKind.VERIFICATION,
                             "Do proteins build muscle?", "yes", "c1"),
            ("m1",),
        ),),
        media_assets=(MediaAsset("m1", "media/m1.svg", "muscle"),),
    )
    base.update(overrides)
    return Topic(**base)


def test_validate_well_formed_tiny_topic():
    assert validate_topic(_tiny_topic()) == []


def test_validate_flags_empty_keywords():
    topic = _tiny_topic(concept={"keywords": ()})
    rules = {(v.field, v.rule) for v in validate_topic(topic)}
    assert ("concepts[c1].keywords", "non-empty") in rules


def test_validate_flags_reversed_span_bounds():
    topic = _tiny_topic(ideal_summary=IdealSummary(
        "Proteins build muscle.", (SummarySpan("c1", 21, 15, "muscle"),)))
    violations = validate_topic(topic)
    assert any(v.field == "conceptSpans" and v.rule == "bounds" for v in violations)


def test_validate_flags_keyword_not_in_statement():
    topic = _tiny_topic(concept={"keywords": ("proteins", "enzyme")})
    violations = validate_topic(topic)
    assert any(v.rule == "subset-of-statement" for v in violations)


def test_validate_flags_overlapping_spans():
    topic = _tiny_topic(ideal_summary=IdealSummary(
        "Proteins build muscle.",
        (SummarySpan("c1", 0, 8, "Proteins"), SummarySpan("c1", 4, 14, "ins build "))))
    violations = validate_topic(topic)
    assert any(v.rule == "non-overlapping" for v in violations)


def test_validate_flags_summary_not_covering_concept():
    topic = _tiny_topic(ideal_summary=IdealSummary("No spans here at all.", ()))
    violations = validate_topic(topic)
    assert any(v.rule == "covers-every-concept-once" for v in violations)


def test_question_order_assigned_in_load_order(demo):
    topic = demo.topic("protein_function")
    orders = [q.order for q in topic.all_questions()]
    assert len(set(orders)) == len(orders)
    concept_orders = [q.order for c in topic.concepts for q in c.prompts]
    assert concept_orders == sorted(concept_orders)


def test_keywords_are_statement_tokens(demo):
    for topic in demo.topics.values():
        for c in topic.concepts:
            from tutorengine.textmatch import tokenize
            statement_tokens = {t.normalized for t in tokenize(c.statement)}
            assert set(c.keywords) <= statement_tokens


def test_standards_reference_known_topics(demo):
    assert demo.standards
    for std in demo.standards:
        assert std.description
        for tid in std.topics:
            assert demo.topic(tid) is not None


def test_duplicate_topic_id_rejected(tmp_path, demo):
    doc = topic_to_dict(demo.topic("carbohydrate_function"))
    (tmp_path / "a.json").write_text(json.dumps(doc))
    (tmp_path / "b.json").write_text(json.dumps(doc))
    with pytest.raises(SchemaViolation):
        load_curriculum(tmp_path)


def test_topic_from_dict_matches_loader(demo, tmp_path):
    topic = demo.topic("protein_function")
    assert topic_from_dict(topic_to_dict(topic)) == topic
