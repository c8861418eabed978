"""Seeded generation of answer-option sets for the choice-based subtests.

Every generator is a pure function of its inputs plus an explicit
RandomSource, so a session seed reproduces the exact option layout on any
platform and across process restarts.

Sub-stream scheme: each question screen draws from its own child stream of
the session seed, ``stream_id = subtest_ordinal * 1000 + question_ordinal``
(orientation=1, word_registration=2, clock=3, delayed_recall=4,
logical_memory=5).  Child seeds are derived by hashing, so adding or
removing one screen never perturbs the draws of another.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import random
from dataclasses import dataclass
from enum import Enum

from .item_bank import CountryLists, StoryComponent, WordItem

MASK64 = (1 << 64) - 1

SUBTEST_ORDINALS = {
    "orientation": 1,
    "word_registration": 2,
    "clock_drawing": 3,
    "delayed_recall": 4,
    "logical_memory": 5,
}

COUNTRY_OPTION_COUNT = 12
YEAR_OPTION_COUNT = 12
YEAR_SPAN = 20
WORD_OPTION_COUNT = 16
WORD_DISTRACTOR_COUNT = 11
STORY_OPTION_COUNT = 6

MONTH_NAMES = {
    "de": (
        "Januar", "Februar", "März", "April", "Mai", "Juni",
        "Juli", "August", "September", "Oktober", "November", "Dezember",
    ),
    "en": (
        "January", "February", "March", "April", "May", "June",
        "July", "August", "September", "October", "November", "December",
    ),
}

WEEKDAY_NAMES = {
    "de": ("Montag", "Dienstag", "Mittwoch", "Donnerstag", "Freitag", "Samstag", "Sonntag"),
    "en": ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"),
}


class QuestionKind(str, Enum):
    COUNTRY = "country"
    YEAR = "year"
    MONTH = "month"
    DATE = "date"
    WEEKDAY = "weekday"
    WORD_RECOGNITION = "word_recognition"
    STORY_STEP = "story_step"


class OptionGenError(Exception):
    """A generator's input pool cannot satisfy the required counts."""


@dataclass(frozen=True)
class Option:
    id: str
    text: str
    is_correct: bool


@dataclass(frozen=True)
class OptionSet:
    question_kind: QuestionKind
    options: tuple[Option, ...]

    def correct_ids(self) -> frozenset[str]:
        return frozenset(o.id for o in self.options if o.is_correct)

    def correct_texts(self) -> frozenset[str]:
        return frozenset(o.text for o in self.options if o.is_correct)

    def texts(self) -> tuple[str, ...]:
        return tuple(o.text for o in self.options)

    def option_by_id(self, option_id: str) -> Option | None:
        for o in self.options:
            if o.id == option_id:
                return o
        return None

    def public_options(self) -> list[dict]:
        """Client view: ids and texts only, never correctness."""
        return [{"id": o.id, "text": o.text} for o in self.options]

    def to_json_dict(self) -> dict:
        """Full serialization, for in-store session materialization only."""
        return {
            "question_kind": self.question_kind.value,
            "options": [
                {"id": o.id, "text": o.text, "is_correct": o.is_correct}
                for o in self.options
            ],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "OptionSet":
        return cls(
            question_kind=QuestionKind(doc["question_kind"]),
            options=tuple(
                Option(id=o["id"], text=o["text"], is_correct=bool(o["is_correct"]))
                for o in doc["options"]
            ),
        )


class RandomSource:
    """Deterministic RNG for option draws.

    Built on the Mersenne Twister float stream (the one primitive the stdlib
    guarantees stable across versions and platforms); integer draws, shuffles
    and sampling are implemented here so the byte-for-byte draw sequence is
    owned by this artifact.
    """

    ALGORITHM = "mt19937-float53"

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self._rng = random.Random(self.seed)

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randbelow requires n >= 1")
        return min(int(self._rng.random() * n), n - 1)

    def randint_inclusive(self, lo: int, hi: int) -> int:
        return lo + self.randbelow(hi - lo + 1)

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, population: list, k: int) -> list:
        """k draws without replacement, order of draws preserved."""
        if k > len(population):
            raise OptionGenError(
                f"cannot draw {k} items from a pool of {len(population)}"
            )
        pool = list(population)
        out = []
        for i in range(k):
            j = i + self.randbelow(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
            out.append(pool[i])
        return out


def derive_substream_seed(session_seed: int, stream_id: int) -> int:
    """Platform-stable child seed for one question screen."""
    payload = b"cogscreen-stream" + (session_seed & MASK64).to_bytes(8, "big") + stream_id.to_bytes(8, "big")
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")


def substream(session_seed: int, subtest: str, question_ordinal: int) -> RandomSource:
    stream_id = SUBTEST_ORDINALS[subtest] * 1000 + question_ordinal
    return RandomSource(derive_substream_seed(session_seed, stream_id))


def _assemble(kind: QuestionKind, texts: list[str], correct: set[str], rng: RandomSource | None) -> OptionSet:
    if rng is not None:
        rng.shuffle(texts)
    options = tuple(
        Option(id=f"{kind.value}-{i}", text=text, is_correct=text in correct)
        for i, text in enumerate(texts)
    )
    if len(set(texts)) != len(texts):
        raise OptionGenError(f"duplicate option texts in {kind.value} set: {texts}")
    return OptionSet(question_kind=kind, options=options)


def gen_country_options(countries: CountryLists, rng: RandomSource) -> OptionSet:
    """Home country + 7 European + 4 world countries, shuffled."""
    european_pool = [c for c in countries.european if c != countries.home_country]
    world_pool = [c for c in countries.world if c != countries.home_country]
    texts = [countries.home_country]
    texts += rng.sample(european_pool, 7)
    texts += rng.sample(world_pool, 4)
    return _assemble(QuestionKind.COUNTRY, texts, {countries.home_country}, rng)


def gen_year_options(current_year: int, rng: RandomSource) -> OptionSet:
    """The current year + 11 distinct years within +/- 20 of it, shuffled."""
    if not 1900 <= current_year <= 2200:
        raise OptionGenError(f"current year {current_year} outside supported range")
    window = [y for y in range(current_year - YEAR_SPAN, current_year + YEAR_SPAN + 1) if y != current_year]
    years = [current_year] + rng.sample(window, YEAR_OPTION_COUNT - 1)
    return _assemble(QuestionKind.YEAR, [str(y) for y in years], {str(current_year)}, rng)


def gen_calendar_options(kind: QuestionKind, today: dt.date, locale: str = "de") -> OptionSet:
    """All available options in calendar order; no randomness.

    The date question always offers 1..31 regardless of month length: a
    stable grid is easier to scan, and the correct day is always present.
    """
    lang = locale.split("-")[0].lower()
    if kind == QuestionKind.MONTH:
        names = MONTH_NAMES.get(lang, MONTH_NAMES["en"])
        return _assemble(kind, list(names), {names[today.month - 1]}, None)
    if kind == QuestionKind.DATE:
        return _assemble(kind, [str(d) for d in range(1, 32)], {str(today.day)}, None)
    if kind == QuestionKind.WEEKDAY:
        names = WEEKDAY_NAMES.get(lang, WEEKDAY_NAMES["en"])
        return _assemble(kind, list(names), {names[today.weekday()]}, None)
    raise OptionGenError(f"{kind} is not a calendar question kind")


def gen_word_options(targets: list[WordItem], rng: RandomSource) -> OptionSet:
    """5 target words + 11 distractors from the pooled distractor union."""
    target_texts = [w.text for w in targets]
    pool: list[str] = []
    seen: set[str] = set(target_texts)
    for w in targets:
        for d in w.related_distractors:
            if d not in seen:
                pool.append(d)
                seen.add(d)
    if len(pool) < WORD_DISTRACTOR_COUNT:
        raise OptionGenError(
            f"distractor union has {len(pool)} entries, needs {WORD_DISTRACTOR_COUNT}"
        )
    texts = target_texts + rng.sample(pool, WORD_DISTRACTOR_COUNT)
    return _assemble(QuestionKind.WORD_RECOGNITION, texts, set(target_texts), rng)


def gen_story_step_options(component: StoryComponent, rng: RandomSource) -> OptionSet:
    """The correct story component and its 5 distractors, shuffled."""
    texts = [component.correct_text] + list(component.distractors)
    return _assemble(QuestionKind.STORY_STEP, texts, {component.correct_text}, rng)
