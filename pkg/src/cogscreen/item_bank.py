"""Locale-specific test content: word lists, story, countries, question texts.

An item bank is external data, loaded from a JSON document and validated
against the structural requirements of the screening protocol.  Banks are
immutable after load and safe to share across concurrently running sessions.

The bundled sample bank (``data/sample_bank_de.json``) contains plausible
German placeholder content and is NOT clinically validated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, IO, Mapping, Union

BANK_SCHEMA_VERSION = 1

# Distractor pool floor per registration word: a selection screen draws 11
# distractors, and every word's own pool must be deep enough to sustain that
# draw even if pools overlap heavily.
MIN_WORD_DISTRACTORS = 11
MIN_EUROPEAN_COUNTRIES = 8
MIN_WORLD_COUNTRIES = 5
STORY_LENGTH = 9
STORY_DISTRACTORS_PER_STEP = 5
REGISTRATION_WORD_COUNT = 5
CONSENT_QUESTION_COUNT = 3

# Comprehension gate: (reliable-diagnosis? -> no, can-stop? -> yes, agree? -> yes).
CONSENT_EXPECTED_ANSWERS = ("no", "yes", "yes")


class ItemBankError(Exception):
    """Base class for item-bank loading problems."""


class ItemBankParseError(ItemBankError):
    """The source document is not well-formed."""


class ItemBankValidationError(ItemBankError):
    """The document parsed but violates bank invariants."""

    def __init__(self, violations: list["Violation"]):
        self.violations = violations
        lines = "; ".join(f"{v.code} at {v.path}: {v.message}" for v in violations)
        super().__init__(f"item bank invalid ({len(violations)} violation(s)): {lines}")


@dataclass(frozen=True)
class Violation:
    """One violated invariant, machine-readable code plus human text."""

    code: str
    path: str
    message: str


@dataclass(frozen=True)
class WordItem:
    text: str
    speech_text: str
    related_distractors: tuple[str, ...]


@dataclass(frozen=True)
class StoryComponent:
    ordinal: int  # position 1..9
    correct_text: str
    target_word_count: int
    distractors: tuple[str, ...]


@dataclass(frozen=True)
class CountryLists:
    home_country: str
    european: tuple[str, ...]
    world: tuple[str, ...]


@dataclass(frozen=True)
class BankQuestion:
    """A yes/no question shown before the test proper.

    ``expected_answer`` is the gating answer for consent questions and the
    unremarkable answer for environment questions (deviations are flagged in
    the professional report, never scored).
    """

    id: str
    text: str
    expected_answer: str  # "yes" | "no"


@dataclass(frozen=True)
class ItemBank:
    locale: str
    countries: CountryLists
    registration_words: tuple[WordItem, ...]
    story: tuple[StoryComponent, ...]
    consent_questions: tuple[BankQuestion, ...]
    environment_questions: tuple[BankQuestion, ...]
    non_clinical: bool = True
    note: str = ""

    def word_texts(self) -> tuple[str, ...]:
        return tuple(w.text for w in self.registration_words)

    def story_target_word_total(self) -> int:
        return sum(c.target_word_count for c in self.story)


Source = Union[str, Path, IO[str], Mapping[str, Any]]


def _read_document(source: Source) -> dict:
    if isinstance(source, Mapping):
        return dict(source)
    try:
        if isinstance(source, (str, Path)):
            text = Path(source).read_text(encoding="utf-8")
        else:
            text = source.read()
        doc = json.loads(text)
    except OSError as exc:
        raise ItemBankParseError(f"cannot read item bank: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ItemBankParseError(f"malformed item bank document: {exc}") from exc
    if not isinstance(doc, dict):
        raise ItemBankParseError("item bank document must be a JSON object")
    return doc


def _str_list(value: Any) -> tuple[str, ...]:
    if not isinstance(value, list):
        return ()
    return tuple(str(item) for item in value)


def _build_bank(doc: dict) -> ItemBank:
    """Structural parse only; invariants are checked by validate_item_bank."""
    version = doc.get("schema_version")
    if version != BANK_SCHEMA_VERSION:
        raise ItemBankParseError(
            f"unsupported item bank schema_version {version!r} (expected {BANK_SCHEMA_VERSION})"
        )

    countries_doc = doc.get("countries") or {}
    countries = CountryLists(
        home_country=str(countries_doc.get("home", "")),
        european=_str_list(countries_doc.get("european")),
        world=_str_list(countries_doc.get("world")),
    )

    words = []
    for entry in doc.get("registration_words") or []:
        words.append(
            WordItem(
                text=str(entry.get("text", "")),
                speech_text=str(entry.get("speech_text") or entry.get("text", "")),
                related_distractors=_str_list(entry.get("distractors")),
            )
        )

    story = []
    for i, entry in enumerate(doc.get("story") or []):
        story.append(
            StoryComponent(
                ordinal=int(entry.get("ordinal", i + 1)),
                correct_text=str(entry.get("text", "")),
                target_word_count=int(entry.get("target_words", 0)),
                distractors=_str_list(entry.get("distractors")),
            )
        )

    def questions(key: str, prefix: str) -> tuple[BankQuestion, ...]:
        out = []
        for i, entry in enumerate(doc.get(key) or []):
            out.append(
                BankQuestion(
                    id=str(entry.get("id") or f"{prefix}{i + 1}"),
                    text=str(entry.get("text", "")),
                    expected_answer=str(entry.get("expected_answer", "")).lower(),
                )
            )
        return tuple(out)

    return ItemBank(
        locale=str(doc.get("locale", "")),
        countries=countries,
        registration_words=tuple(words),
        story=tuple(story),
        consent_questions=questions("consent_questions", "consent-q"),
        environment_questions=questions("environment_questions", "env-q"),
        non_clinical=bool(doc.get("non_clinical", True)),
        note=str(doc.get("note", "")),
    )


def validate_item_bank(bank: ItemBank) -> list[Violation]:
    """Return every violated invariant; an empty list means the bank is valid."""
    out: list[Violation] = []

    def bad(code: str, path: str, message: str) -> None:
        out.append(Violation(code=code, path=path, message=message))

    if not bank.locale:
        bad("LOCALE_EMPTY", "locale", "locale tag must be non-empty")

    c = bank.countries
    if not c.home_country:
        bad("HOME_COUNTRY_EMPTY", "countries.home", "home country must be non-empty")
    european = [x for x in c.european if x != c.home_country]
    if len(european) < MIN_EUROPEAN_COUNTRIES:
        bad(
            "INSUFFICIENT_EU_COUNTRIES",
            "countries.european",
            f"need at least {MIN_EUROPEAN_COUNTRIES} European countries besides the home "
            f"country to draw 7 distractors, found {len(european)}",
        )
    if len(c.world) < MIN_WORLD_COUNTRIES:
        bad(
            "INSUFFICIENT_WORLD_COUNTRIES",
            "countries.world",
            f"need at least {MIN_WORLD_COUNTRIES} world countries, found {len(c.world)}",
        )
    if c.home_country and c.home_country in c.european:
        bad("HOME_IN_LIST", "countries.european", "home country must not appear in the European list")
    if c.home_country and c.home_country in c.world:
        bad("HOME_IN_LIST", "countries.world", "home country must not appear in the world list")
    overlap = sorted(set(c.european) & set(c.world))
    if overlap:
        bad(
            "COUNTRY_LISTS_OVERLAP",
            "countries",
            f"European and world lists share entries (would allow duplicate options): {overlap}",
        )
    for path, values in (("countries.european", c.european), ("countries.world", c.world)):
        if len(set(values)) != len(values):
            bad("DUPLICATE_COUNTRY", path, "country list contains duplicates")

    if len(bank.registration_words) != REGISTRATION_WORD_COUNT:
        bad(
            "WORD_COUNT",
            "registration_words",
            f"exactly {REGISTRATION_WORD_COUNT} registration words required, "
            f"found {len(bank.registration_words)}",
        )
    targets = set(bank.word_texts())
    for i, word in enumerate(bank.registration_words):
        path = f"registration_words[{i}]"
        if not word.text:
            bad("WORD_TEXT_EMPTY", path, "word text must be non-empty")
        pool = word.related_distractors
        if len(set(pool)) != len(pool):
            bad("DUPLICATE_DISTRACTOR", f"{path}.distractors", "distractor pool contains duplicates")
        if len(set(pool)) < MIN_WORD_DISTRACTORS:
            bad(
                "INSUFFICIENT_WORD_DISTRACTORS",
                f"{path}.distractors",
                f"word '{word.text}' has {len(set(pool))} distinct distractors, "
                f"needs at least {MIN_WORD_DISTRACTORS}",
            )
        clashes = sorted(set(pool) & targets)
        if clashes:
            bad(
                "DUPLICATE_OF_TARGET",
                f"{path}.distractors",
                f"distractors equal to target words: {clashes}",
            )

    if len(bank.story) != STORY_LENGTH:
        bad(
            "STORY_LENGTH",
            "story",
            f"story must have exactly {STORY_LENGTH} components, found {len(bank.story)}",
        )
    expected_ordinals = list(range(1, len(bank.story) + 1))
    if [comp.ordinal for comp in bank.story] != expected_ordinals:
        bad("STORY_ORDINALS", "story", "story ordinals must be consecutive starting at 1")
    for i, comp in enumerate(bank.story):
        path = f"story[{i}]"
        if not comp.correct_text:
            bad("STORY_TEXT_EMPTY", f"{path}.text", "story component text must be non-empty")
        if comp.target_word_count < 1:
            bad(
                "STORY_TARGET_COUNT",
                f"{path}.target_words",
                "each story component carries at least one target word",
            )
        if len(comp.distractors) != STORY_DISTRACTORS_PER_STEP:
            bad(
                "STORY_DISTRACTOR_COUNT",
                f"{path}.distractors",
                f"exactly {STORY_DISTRACTORS_PER_STEP} distractors required, "
                f"found {len(comp.distractors)}",
            )
        if len(set(comp.distractors)) != len(comp.distractors):
            bad("STORY_DISTRACTOR_DUPLICATE", f"{path}.distractors", "distractors must be pairwise distinct")
        if comp.correct_text and comp.correct_text in comp.distractors:
            bad(
                "STORY_DISTRACTOR_EQUALS_TEXT",
                f"{path}.distractors",
                "a distractor equals the correct component text",
            )

    if len(bank.consent_questions) != CONSENT_QUESTION_COUNT:
        bad(
            "CONSENT_QUESTION_COUNT",
            "consent_questions",
            f"exactly {CONSENT_QUESTION_COUNT} consent questions required "
            "(two comprehension checks plus the agreement), "
            f"found {len(bank.consent_questions)}",
        )
    else:
        got = tuple(q.expected_answer for q in bank.consent_questions)
        if got != CONSENT_EXPECTED_ANSWERS:
            bad(
                "CONSENT_EXPECTED_ANSWERS",
                "consent_questions",
                f"gate answers must be {CONSENT_EXPECTED_ANSWERS}, found {got}",
            )
    if not bank.environment_questions:
        bad(
            "NO_ENVIRONMENT_QUESTIONS",
            "environment_questions",
            "at least one environment-state question is required",
        )
    seen_ids: set[str] = set()
    for group, qs in (
        ("consent_questions", bank.consent_questions),
        ("environment_questions", bank.environment_questions),
    ):
        for i, q in enumerate(qs):
            if not q.text:
                bad("QUESTION_TEXT_EMPTY", f"{group}[{i}].text", "question text must be non-empty")
            if q.expected_answer not in ("yes", "no"):
                bad(
                    "QUESTION_ANSWER_INVALID",
                    f"{group}[{i}].expected_answer",
                    f"expected answer must be 'yes' or 'no', found {q.expected_answer!r}",
                )
            if q.id in seen_ids:
                bad("DUPLICATE_QUESTION_ID", f"{group}[{i}].id", f"question id {q.id!r} reused")
            seen_ids.add(q.id)

    return out


def load_item_bank(source: Source) -> ItemBank:
    """Parse and validate an item-bank document.

    Raises ItemBankParseError for malformed documents and
    ItemBankValidationError (listing every violation) for invalid ones.
    """
    bank = _build_bank(_read_document(source))
    violations = validate_item_bank(bank)
    if violations:
        raise ItemBankValidationError(violations)
    return bank


def serialize_item_bank(bank: ItemBank) -> dict:
    """Inverse of load: a document dict that loads back to an equal bank."""
    return {
        "schema_version": BANK_SCHEMA_VERSION,
        "locale": bank.locale,
        "non_clinical": bank.non_clinical,
        "note": bank.note,
        "countries": {
            "home": bank.countries.home_country,
            "european": list(bank.countries.european),
            "world": list(bank.countries.world),
        },
        "registration_words": [
            {
                "text": w.text,
                "speech_text": w.speech_text,
                "distractors": list(w.related_distractors),
            }
            for w in bank.registration_words
        ],
        "story": [
            {
                "ordinal": comp.ordinal,
                "text": comp.correct_text,
                "target_words": comp.target_word_count,
                "distractors": list(comp.distractors),
            }
            for comp in bank.story
        ],
        "consent_questions": [
            {"id": q.id, "text": q.text, "expected_answer": q.expected_answer}
            for q in bank.consent_questions
        ],
        "environment_questions": [
            {"id": q.id, "text": q.text, "expected_answer": q.expected_answer}
            for q in bank.environment_questions
        ],
    }


def bundled_bank_path() -> Path:
    return Path(__file__).parent / "data" / "sample_bank_de.json"


def load_bundled_bank() -> ItemBank:
    """The shipped German sample bank (placeholder content, non-clinical)."""
    return load_item_bank(bundled_bank_path())
