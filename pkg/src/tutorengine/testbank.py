"""Knowledge-test item bank and test assembly.

Immediate tests: 12 multiple-choice items each, half on the tutored
topic and half on an untutored one, with pre- and post-test item sets
disjoint. Delayed tests: 48 items over a cycle's four topics, half
previously seen and half new. Assembly is a seeded permutation, so item
counts and split constraints hold for every seed.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

from .errors import InsufficientItems, UnknownItem

logger = logging.getLogger(__name__)

IMMEDIATE_ITEMS = 12
IMMEDIATE_PER_TOPIC = IMMEDIATE_ITEMS // 2
DELAYED_ITEMS = 48
DELAYED_PER_TOPIC = DELAYED_ITEMS // 4
DELAYED_SEEN_PER_TOPIC = DELAYED_PER_TOPIC // 2


class ItemSource(str, Enum):
    RESEARCHER = "Researcher"
    STANDARDIZED = "Standardized"


class TestKind(str, Enum):
    PRE = "Pre"
    POST = "Post"
    DELAYED = "Delayed"


@dataclass(frozen=True)
class TestItem:
    item_id: str
    topic_id: str
    stem: str
    options: tuple[str, str, str, str]
    key_index: int
    source: ItemSource

    def __post_init__(self):
        assert len(self.options) == 4, "items carry exactly four options"
        assert 0 <= self.key_index <= 3, "key index out of range"
        assert self.stem.strip(), "empty stem"


@dataclass
class ItemBank:
    items: dict[str, TestItem] = field(default_factory=dict)

    def add(self, item: TestItem) -> None:
        self.items[item.item_id] = item

    def item(self, item_id: str) -> TestItem:
        if item_id not in self.items:
            raise UnknownItem(f"no item {item_id}")
        return self.items[item_id]

    def by_topic(self, topic_id: str) -> list[TestItem]:
        return sorted((i for i in self.items.values() if i.topic_id == topic_id),
                      key=lambda i: i.item_id)

    def lint(self) -> list[str]:
        """Advisory checks; returns warning strings (never raises)."""
        warnings = []
        researcher = sum(1 for i in self.items.values()
                         if i.source == ItemSource.RESEARCHER)
        standardized = sum(1 for i in self.items.values()
                           if i.source == ItemSource.STANDARDIZED)
        if standardized:
            ratio = researcher / standardized
            if not 1.5 <= ratio <= 2.5:
                warnings.append(
                    f"researcher:standardized ratio {ratio:.2f} is far from 2:1 "
                    f"({researcher}:{standardized})")
        elif researcher:
            warnings.append("bank has no standardized items")
        return warnings


@dataclass(frozen=True)
class AssembledTest:
    test_id: str
    kind: TestKind
    items: tuple[str, ...]
    per_student_order_seed: int


def load_item_bank(path: str | Path) -> ItemBank:
    bank = ItemBank()
    for line in Path(path).read_text("utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        d = json.loads(line)
        bank.add(TestItem(
            item_id=d["itemId"],
            topic_id=d["topicId"],
            stem=d["stem"],
            options=tuple(d["options"]),
            key_index=d["keyIndex"],
            source=ItemSource(d["source"]),
        ))
    for warning in bank.lint():
        logger.warning("item bank: %s", warning)
    return bank


def bundled_item_bank_path() -> Path:
    return Path(str(resources.files("tutorengine.resources").joinpath("itembank.jsonl")))


def assemble_immediate_tests(
    bank: ItemBank,
    tutored_topic: str,
    untutored_topic: str,
    seed: int,
) -> tuple[AssembledTest, AssembledTest]:
    """Build disjoint 12-item pre- and post-tests, 6 items per topic each."""
    rng = random.Random(seed)
    pre_items: list[str] = []
    post_items: list[str] = []
    for topic_id in (tutored_topic, untutored_topic):
        pool = bank.by_topic(topic_id)
        need = 2 * IMMEDIATE_PER_TOPIC
        if len(pool) < need:
            raise InsufficientItems(topic_id, have=len(pool), need=need)
        chosen = rng.sample(pool, need)
        pre_items += [i.item_id for i in chosen[:IMMEDIATE_PER_TOPIC]]
        post_items += [i.item_id for i in chosen[IMMEDIATE_PER_TOPIC:]]
    rng.shuffle(pre_items)
    rng.shuffle(post_items)
    order_seed = rng.randrange(2 ** 31)
    pre = AssembledTest(test_id=f"pre-{seed}", kind=TestKind.PRE,
                        items=tuple(pre_items), per_student_order_seed=order_seed)
    post = AssembledTest(test_id=f"post-{seed}", kind=TestKind.POST,
                         items=tuple(post_items), per_student_order_seed=order_seed)
    return pre, post


def assemble_delayed_test(
    bank: ItemBank,
    cycle_topics: list[str],
    seen_item_ids: set[str],
    seed: int,
) -> AssembledTest:
    """Build the 48-item delayed test: 12 per cycle topic, 24 seen + 24 new."""
    if len(cycle_topics) != 4:
        raise InsufficientItems(",".join(cycle_topics), have=len(cycle_topics), need=4)
    rng = random.Random(seed)
    chosen: list[str] = []
    for topic_id in cycle_topics:
        pool = bank.by_topic(topic_id)
        seen_pool = [i for i in pool if i.item_id in seen_item_ids]
        new_pool = [i for i in pool if i.item_id not in seen_item_ids]
        if len(seen_pool) < DELAYED_SEEN_PER_TOPIC:
            raise InsufficientItems(topic_id, have=len(seen_pool),
                                    need=DELAYED_SEEN_PER_TOPIC)
        if len(new_pool) < DELAYED_SEEN_PER_TOPIC:
            raise InsufficientItems(topic_id, have=len(new_pool),
                                    need=DELAYED_SEEN_PER_TOPIC)
        chosen += [i.item_id for i in rng.sample(seen_pool, DELAYED_SEEN_PER_TOPIC)]
        chosen += [i.item_id for i in rng.sample(new_pool, DELAYED_SEEN_PER_TOPIC)]
    rng.shuffle(chosen)
    return AssembledTest(test_id=f"delayed-{seed}", kind=TestKind.DELAYED,
                         items=tuple(chosen),
                         per_student_order_seed=rng.randrange(2 ** 31))


@dataclass(frozen=True)
class Presentation:
    """Per-student item order and per-item option permutations.

    ``option_order[item_id]`` lists canonical option indices in presented
    order; presented index p maps back to canonical option_order[p].
    """
    item_order: tuple[str, ...]
    option_order: dict[str, tuple[int, int, int, int]]


def presentation_for(test: AssembledTest, bank: ItemBank, student_id: str) -> Presentation:
    """Seeded per-student presentation: item order and option reshuffle."""
    rng = random.Random(f"{test.per_student_order_seed}:{student_id}")
    order = list(test.items)
    rng.shuffle(order)
    option_order = {}
    for item_id in order:
        bank.item(item_id)  # raises UnknownItem for stale tests
        perm = list(range(4))
        rng.shuffle(perm)
        option_order[item_id] = tuple(perm)
    return Presentation(item_order=tuple(order), option_order=option_order)


def score_test(
    test: AssembledTest,
    bank: ItemBank,
    answers: dict[str, int],
    participant: str,
    condition: str,
    test_kind: TestKind | None = None,
    week: int = 0,
    cycle: int = 0,
):
    """One response record per test item; unanswered items score incorrect
    and are flagged. Chosen indices are canonical (option order as in the
    bank); presentation layers translate before calling."""
    from .analytics import ItemResponseRecord  # record type lives with analytics

    for item_id in answers:
        if item_id not in test.items:
            raise UnknownItem(f"item {item_id} not on test {test.test_id}")
    kind = test_kind or test.kind
    records = []
    for item_id in test.items:
        item = bank.item(item_id)
        chosen = answers.get(item_id)
        records.append(ItemResponseRecord(
            participant=participant,
            item=item_id,
            condition=condition,
            test=kind.value,
            correct=(chosen == item.key_index),
            week=week,
            cycle=cycle,
            answered=chosen is not None,
        ))
    return records


def proportion_correct(records) -> float:
    if not records:
        return 0.0
    return sum(1 for r in records if r.correct) / len(records)
