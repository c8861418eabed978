"""Event-sourced test-session state machine.

One session drives one test run: consent gate, volume check and
environment questions, then the five subtests in fixed order (orientation,
word registration, clock drawing, delayed recall, logical memory).  The
session consumes Events and projects Screens; its state is a pure fold of
the event log over (bank, config, seed), so replaying a persisted log
reconstructs the exact same state and report.

Progression follows the global-confirmation convention: nothing advances
automatically, every commit is an explicit confirm event (the one
exception is the legacy ``auto_advance`` timeout mode for orientation,
kept for comparison studies).
"""

from __future__ import annotations

import datetime as dt
import os
import uuid
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

from .clock_scoring import ClockInput, HandStroke, NumberPlacement, Point, score_clock
from .config import (
    EngineConfig,
    SUBTEST_IDS,
    TIMEOUT_AUTO_ADVANCE,
    TIMEOUT_RECORD_ONLY,
    config_from_dict,
)
from .item_bank import ItemBank, load_item_bank, serialize_item_bank, validate_item_bank
from .option_gen import OptionSet, QuestionKind, gen_calendar_options, gen_country_options, \
    gen_story_step_options, gen_word_options, gen_year_options, substream
from .scoring import (
    OrientationResponse,
    ScoreReport,
    SubtestScore,
    build_reports,
    score_logical_memory,
    score_orientation,
    score_word_selection,
)

SESSION_SCHEMA_VERSION = 1
SCREEN_SCHEMA_VERSION = 1
EVENT_SCHEMA_VERSION = 1

MAX_PRESENTATION_CYCLES = 3
WORD_SELECTION_SIZE = 5
STORY_STEPS = 9
ORIENTATION_QUESTIONS = 5
CLOCK_SKEW_THRESHOLD_SECONDS = 5.0
NUMBER_PAD_MAX_VALUE = 99  # two-digit compose on the pad

EVENT_TYPES = frozenset(
    {
        "select",
        "deselect",
        "confirm",
        "clock_tap",
        "number_entered",
        "number_moved",
        "number_deleted",
        "hand_drawn",
        "element_confirmed",
        "timeout_elapsed",
        "abort",
        "answer_environment",
    }
)

ORIENTATION_KINDS = (
    QuestionKind.COUNTRY,
    QuestionKind.YEAR,
    QuestionKind.MONTH,
    QuestionKind.DATE,
    QuestionKind.WEEKDAY,
)


class StateKind(str, Enum):
    CONSENT = "consent"
    ENVIRONMENT = "environment"
    ORIENTATION = "orientation"
    WORD_PRESENTATION = "word_presentation"
    WORD_SELECTION = "word_selection"
    CLOCK_NUMBERS = "clock_numbers"
    CLOCK_HANDS = "clock_hands"
    DELAYED_RECALL = "delayed_recall"
    STORY_PRESENTATION = "story_presentation"
    STORY_STEP = "story_step"
    FINISHED = "finished"
    ABORTED = "aborted"


@dataclass(frozen=True)
class SessionState:
    kind: StateKind
    page: int = 1

    def key(self) -> str:
        return f"{self.kind.value}({self.page})"


_SUBTEST_OF_KIND = {
    StateKind.ORIENTATION: "orientation",
    StateKind.WORD_PRESENTATION: "word_registration",
    StateKind.WORD_SELECTION: "word_registration",
    StateKind.CLOCK_NUMBERS: "clock_drawing",
    StateKind.CLOCK_HANDS: "clock_drawing",
    StateKind.DELAYED_RECALL: "delayed_recall",
    StateKind.STORY_PRESENTATION: "logical_memory",
    StateKind.STORY_STEP: "logical_memory",
}


class SessionError(Exception):
    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)


class EventRejected(SessionError):
    """The event is invalid in the current state; the session is unchanged."""


class EventParseError(SessionError):
    """The event document itself is malformed."""


class SessionStateError(SessionError):
    """Operation not applicable to the session's lifecycle state."""


class DemographicsError(SessionError):
    pass


class ReplayMismatchError(SessionError):
    pass


@dataclass(frozen=True)
class Demographics:
    age: int
    education: str


@dataclass(frozen=True)
class Event:
    type: str
    ts: float
    option_id: Optional[str] = None
    question_id: Optional[str] = None
    answer: Optional[str] = None
    value: Optional[int] = None
    element_id: Optional[str] = None
    x: Optional[float] = None
    y: Optional[float] = None
    x1: Optional[float] = None
    y1: Optional[float] = None
    x2: Optional[float] = None
    y2: Optional[float] = None

    def to_json_dict(self) -> dict:
        doc: dict[str, Any] = {"schema_version": EVENT_SCHEMA_VERSION, "type": self.type, "ts": self.ts}
        for name in ("option_id", "question_id", "answer", "value", "element_id",
                     "x", "y", "x1", "y1", "x2", "y2"):
            v = getattr(self, name)
            if v is not None:
                doc[name] = v
        return doc


_EVENT_REQUIRED_FIELDS = {
    "select": ("option_id",),
    "deselect": ("option_id",),
    "confirm": (),
    "clock_tap": ("x", "y"),
    "number_entered": ("value",),
    "number_moved": ("element_id", "x", "y"),
    "number_deleted": ("element_id",),
    "hand_drawn": ("x1", "y1", "x2", "y2"),
    "element_confirmed": (),
    "timeout_elapsed": (),
    "abort": (),
    "answer_environment": ("question_id", "answer"),
}


def parse_event(doc: Any) -> Event:
    """Validate a wire event document; raises EventParseError."""
    if not isinstance(doc, dict):
        raise EventParseError("EVENT_MALFORMED", "event must be a JSON object")
    etype = doc.get("type")
    if etype not in EVENT_TYPES:
        raise EventParseError("EVENT_UNKNOWN_TYPE", f"unknown event type {etype!r}")
    ts = doc.get("ts")
    if not isinstance(ts, (int, float)) or isinstance(ts, bool):
        raise EventParseError("EVENT_BAD_TIMESTAMP", "event requires a numeric client timestamp 'ts'")

    def opt_str(key: str) -> Optional[str]:
        v = doc.get(key)
        if v is None:
            return None
        if not isinstance(v, str):
            raise EventParseError("EVENT_BAD_FIELD", f"field {key!r} must be a string")
        return v

    def opt_float(key: str) -> Optional[float]:
        v = doc.get(key)
        if v is None:
            return None
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise EventParseError("EVENT_BAD_FIELD", f"field {key!r} must be a number")
        return float(v)

    value = doc.get("value")
    if value is not None:
        if not isinstance(value, int) or isinstance(value, bool):
            raise EventParseError("EVENT_BAD_FIELD", "field 'value' must be an integer")

    event = Event(
        type=etype,
        ts=float(ts),
        option_id=opt_str("option_id"),
        question_id=opt_str("question_id"),
        answer=opt_str("answer"),
        value=value,
        element_id=opt_str("element_id"),
        x=opt_float("x"),
        y=opt_float("y"),
        x1=opt_float("x1"),
        y1=opt_float("y1"),
        x2=opt_float("x2"),
        y2=opt_float("y2"),
    )
    missing = [f for f in _EVENT_REQUIRED_FIELDS[etype] if getattr(event, f) is None]
    if missing:
        raise EventParseError("EVENT_MISSING_FIELDS", f"{etype} requires fields {missing}")
    if etype == "answer_environment" and event.answer not in ("yes", "no"):
        raise EventParseError("EVENT_BAD_FIELD", "answer must be 'yes' or 'no'")
    if etype == "number_entered" and not 0 <= (event.value or 0) <= NUMBER_PAD_MAX_VALUE:
        raise EventParseError(
            "EVENT_VALUE_OUT_OF_RANGE", f"number pad accepts 0..{NUMBER_PAD_MAX_VALUE}"
        )
    if etype == "hand_drawn" and (event.x1, event.y1) == (event.x2, event.y2):
        raise EventParseError("EVENT_DEGENERATE_STROKE", "hand stroke start and end coincide")
    return event


@dataclass(frozen=True)
class LoggedEvent:
    seq: int
    received_ts: float
    event: Event

    def to_json_dict(self) -> dict:
        return {"seq": self.seq, "received_ts": self.received_ts, "event": self.event.to_json_dict()}


@dataclass(frozen=True)
class SpeechSegment:
    text: str
    display_at: float


def estimate_utterance_seconds(text: str, rate: float) -> float:
    """Deterministic duration model: ~12 chars/s at the platform's 0.5 rate."""
    cps = 12.0 * (rate / 0.5)
    return round(max(0.6, len(text) / cps), 3)


def speech_schedule(texts: list[str], rate: float, pause: float) -> tuple[SpeechSegment, ...]:
    """Step-synced reveal offsets: each utterance padded by the pause on both sides."""
    t = 0.0
    out = []
    for text in texts:
        t += pause
        out.append(SpeechSegment(text=text, display_at=round(t, 3)))
        t += estimate_utterance_seconds(text, rate) + pause
    return tuple(out)


@dataclass(frozen=True)
class Screen:
    kind: str
    instruction: str
    speech_segments: tuple[SpeechSegment, ...]
    options: tuple[dict, ...]  # {id, text} only; correctness never leaves the engine
    input_mode: str  # "buttons" | "clock_canvas" | "none"
    min_selections: int
    max_selections: int
    confirm_enabled: bool
    soft_time_limit: Optional[float]
    progress_current: int
    progress_total: int
    selected: tuple[str, ...] = ()
    feedback: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCREEN_SCHEMA_VERSION,
            "kind": self.kind,
            "instruction": self.instruction,
            "speech_segments": [{"text": s.text, "display_at": s.display_at} for s in self.speech_segments],
            "options": [dict(o) for o in self.options],
            "input_mode": self.input_mode,
            "min_selections": self.min_selections,
            "max_selections": self.max_selections,
            "confirm_enabled": self.confirm_enabled,
            "soft_time_limit": self.soft_time_limit,
            "progress": {"current": self.progress_current, "total": self.progress_total},
            "selected": list(self.selected),
            "feedback": self.feedback,
            "extra": self.extra,
        }


UI_STRINGS = {
    "de": {
        "yes": "Ja",
        "no": "Nein",
        "consent": "Wir möchten Ihnen zuerst einige Fragen stellen. "
                   "Tippen Sie auf die richtigen Antworten, damit Sie fortfahren können.",
        "consent_feedback": "Mindestens eine Antwort ist noch nicht richtig. Zur Erinnerung: "
                            "Der Test liefert keine zuverlässige Diagnose, und Sie können nach "
                            "jeder Aufgabe aufhören.",
        "volume_check": "Im Test werden Wörter vorgelesen. Stellen Sie jetzt die Lautstärke mit den "
                        "Tasten am Gerät ein. Wenn Sie ein Hörgerät benötigen, setzen Sie es bitte ein.",
        "environment_state": "Wie fühlen Sie sich im Moment? Bitte beantworten Sie die folgenden Fragen.",
        "orientation_country": "In welchem Land sind wir gerade?",
        "orientation_year": "Welches Jahr haben wir?",
        "orientation_month": "In welchem Monat sind wir?",
        "orientation_date": "Der Wievielte ist heute?",
        "orientation_weekday": "Welcher Wochentag ist heute?",
        "word_presentation": "Merken Sie sich diese 5 Wörter.",
        "word_presentation_retry": "Das war noch nicht richtig. Merken Sie sich die 5 Wörter noch einmal.",
        "word_selection": "Tippen Sie auf die 5 Wörter, die Ihnen gerade genannt wurden. "
                          "Die Reihenfolge spielt keine Rolle.",
        "clock_numbers": "Tippen Sie dorthin, wo auf einem Ziffernblatt eine Zahl stehen würde, "
                         "und geben Sie die Zahl ein. Bestätigen Sie jede Zahl.",
        "clock_hands": "Zeichnen Sie die Zeiger für die Uhrzeit '10 Minuten nach 11' ein. "
                       "Bestätigen Sie jeden Zeiger.",
        "delayed_recall": "Tippen Sie auf die Wörter von vorhin, an die Sie sich erinnern "
                          "(höchstens 5).",
        "story_presentation": "Merken Sie sich diese Geschichte.",
        "story_step_first": "Wiederholen Sie die Geschichte. Tippen Sie auf den Anfang der Geschichte.",
        "story_step_next": "Wiederholen Sie die Geschichte. Tippen Sie auf den nächsten Teil der Geschichte.",
    },
    "en": {
        "yes": "Yes",
        "no": "No",
        "consent": "First we would like to ask you a few questions. "
                   "Tap the correct answers to continue.",
        "consent_feedback": "At least one answer is not correct yet. Remember: the test does not "
                            "provide a reliable diagnosis, and you can stop after every task.",
        "volume_check": "Words will be read aloud during the test. Adjust the volume with the "
                        "device buttons now. If you need a hearing aid, please put it in.",
        "environment_state": "How do you feel right now? Please answer these questions.",
        "orientation_country": "Which country are we in?",
        "orientation_year": "What year is it?",
        "orientation_month": "Which month is it?",
        "orientation_date": "What is today's date?",
        "orientation_weekday": "What day of the week is it?",
        "word_presentation": "Remember these 5 words.",
        "word_presentation_retry": "Not quite right yet. Remember the 5 words once more.",
        "word_selection": "Tap the 5 words you were just told. The order does not matter.",
        "clock_numbers": "Tap where a number would sit on a clock face, then enter the number. "
                         "Confirm each number.",
        "clock_hands": "Draw the hands for the time '10 past 11'. Confirm each hand.",
        "delayed_recall": "Tap the words from earlier that you remember (5 at most).",
        "story_presentation": "Remember this story.",
        "story_step_first": "Repeat the story. Tap the beginning of the story.",
        "story_step_next": "Repeat the story. Tap the next part of the story.",
    },
}


def _ui(locale: str) -> dict:
    return UI_STRINGS.get(locale.split("-")[0].lower(), UI_STRINGS["en"])


def _screen_order() -> list[str]:
    order = ["consent", "volume_check", "environment_state"]
    order += [f"orientation-{q}" for q in range(1, ORIENTATION_QUESTIONS + 1)]
    order += ["word_presentation", "word_selection", "clock_numbers", "clock_hands",
              "delayed_recall", "story_presentation"]
    order += [f"story_step-{n}" for n in range(1, STORY_STEPS + 1)]
    return order


SCREEN_ORDER = _screen_order()
SCREEN_TOTAL = len(SCREEN_ORDER)


def _progress_key(state: SessionState) -> str:
    if state.kind == StateKind.CONSENT:
        return "consent"
    if state.kind == StateKind.ENVIRONMENT:
        return "volume_check" if state.page == 1 else "environment_state"
    if state.kind == StateKind.ORIENTATION:
        return f"orientation-{state.page}"
    if state.kind in (StateKind.WORD_PRESENTATION, StateKind.WORD_SELECTION):
        # Re-presentation cycles keep the same progress slot.
        return state.kind.value
    if state.kind == StateKind.STORY_STEP:
        return f"story_step-{state.page}"
    return state.kind.value


def materialize_option_sets(bank: ItemBank, seed: int, test_date: dt.date) -> dict[tuple[str, int], OptionSet]:
    """Every option set a session can show, derived from seed sub-streams."""
    sets: dict[tuple[str, int], OptionSet] = {}
    sets[("orientation", 1)] = gen_country_options(bank.countries, substream(seed, "orientation", 1))
    sets[("orientation", 2)] = gen_year_options(test_date.year, substream(seed, "orientation", 2))
    sets[("orientation", 3)] = gen_calendar_options(QuestionKind.MONTH, test_date, bank.locale)
    sets[("orientation", 4)] = gen_calendar_options(QuestionKind.DATE, test_date, bank.locale)
    sets[("orientation", 5)] = gen_calendar_options(QuestionKind.WEEKDAY, test_date, bank.locale)
    words = list(bank.registration_words)
    for cycle in range(1, MAX_PRESENTATION_CYCLES + 1):
        sets[("word_selection", cycle)] = gen_word_options(words, substream(seed, "word_registration", cycle))
    sets[("delayed_recall", 1)] = gen_word_options(words, substream(seed, "delayed_recall", 1))
    for step in range(1, STORY_STEPS + 1):
        sets[("story_step", step)] = gen_story_step_options(
            bank.story[step - 1], substream(seed, "logical_memory", step)
        )
    return sets


@dataclass
class _OrientationRecord:
    selected_id: Optional[str] = None
    elapsed_seconds: float = 0.0
    timed_out: bool = False
    committed: bool = False


class Session:
    """Mutable session container; state is always a fold of the event log."""

    def __init__(
        self,
        config: EngineConfig,
        bank: ItemBank,
        demographics: Demographics,
        seed: int,
        session_id: str,
        created_ts: float,
    ):
        self.config = config
        self.bank = bank
        self.demographics = demographics
        self.seed = seed
        self.id = session_id
        self.created_ts = created_ts
        self.test_date = dt.datetime.fromtimestamp(created_ts, tz=dt.timezone.utc).date()

        self.option_sets = materialize_option_sets(bank, seed, self.test_date)
        self.event_log: list[LoggedEvent] = []
        self.state = SessionState(StateKind.CONSENT, 1)
        self.state_entered_ts: Optional[float] = None

        self.started_ts: Optional[float] = None
        self.finished_ts: Optional[float] = None
        self.consent_confirmed_ts: Optional[float] = None
        self.consent_answers: dict[str, str] = {}
        self.environment_answers: dict[str, str] = {}
        self.selections: list[str] = []
        self.orientation_records = [
            _OrientationRecord() for _ in range(ORIENTATION_QUESTIONS)
        ]
        self.word_cycles: list[dict] = []  # {cycle, selected_ids, all_correct}
        self.presentation_cycles = 0
        self.recall_selection: list[str] = []
        self.recall_committed = False
        self.story_selections: list[Optional[str]] = []
        self.clock_numbers: list[dict] = []  # {id, value, x, y}
        self.clock_hands: list[dict] = []  # {id, x1, y1, x2, y2}
        self._pending_tap: Optional[tuple[float, float]] = None
        self._pending_value: Optional[int] = None
        self._pending_stroke: Optional[tuple[float, float, float, float]] = None
        self._element_counter = 0
        self.subtest_entered: dict[str, float] = {}
        self.subtest_exited: dict[str, float] = {}
        self.timeout_events: list[dict] = []
        self.clock_skew_flags = 0

    # -- lifecycle ---------------------------------------------------------

    def is_terminal(self) -> bool:
        return self.state.kind in (StateKind.FINISHED, StateKind.ABORTED)

    def is_aborted(self) -> bool:
        return self.state.kind == StateKind.ABORTED

    def state_key(self) -> str:
        return self.state.key()

    # -- event application --------------------------------------------------

    def apply(self, event: Event, received_ts: Optional[float] = None) -> "Session":
        """Validate and apply one event; rejected events leave the session unchanged."""
        if self.is_terminal():
            raise EventRejected("SESSION_FINISHED", "finished sessions reject further events")
        handler = getattr(self, f"_on_{self.state.kind.value}", None)
        if event.type == "abort":
            self._exit_subtest(event.ts)
            self.state = SessionState(StateKind.ABORTED)
            self.finished_ts = event.ts
        else:
            if handler is None:
                raise EventRejected("EVENT_INVALID_IN_STATE", f"no events apply in {self.state_key()}")
            handler(event)
        self._log(event, received_ts)
        return self

    def _log(self, event: Event, received_ts: Optional[float]) -> None:
        if self.started_ts is None:
            self.started_ts = event.ts
        if self.state_entered_ts is None:
            self.state_entered_ts = event.ts
        received = event.ts if received_ts is None else received_ts
        if abs(received - event.ts) > CLOCK_SKEW_THRESHOLD_SECONDS:
            self.clock_skew_flags += 1
        self.event_log.append(LoggedEvent(seq=len(self.event_log), received_ts=received, event=event))

    def _transition(self, new_state: SessionState, ts: float) -> None:
        old_sub = _SUBTEST_OF_KIND.get(self.state.kind)
        new_sub = _SUBTEST_OF_KIND.get(new_state.kind)
        if new_sub != old_sub:
            if old_sub is not None:
                self.subtest_exited.setdefault(old_sub, ts)
            if new_sub is not None:
                self.subtest_entered.setdefault(new_sub, ts)
        self.state = new_state
        self.state_entered_ts = ts
        self.selections = []
        if new_state.kind == StateKind.WORD_PRESENTATION:
            self.presentation_cycles += 1
        if new_state.kind == StateKind.FINISHED:
            self.finished_ts = ts

    def _exit_subtest(self, ts: float) -> None:
        sub = _SUBTEST_OF_KIND.get(self.state.kind)
        if sub is not None:
            self.subtest_exited.setdefault(sub, ts)

    # -- per-state handlers --------------------------------------------------

    def _require(self, condition: bool, code: str, message: str) -> None:
        if not condition:
            raise EventRejected(code, message)

    def _consent_option_ids(self) -> set[str]:
        out = set()
        for q in self.bank.consent_questions:
            out.add(f"{q.id}:yes")
            out.add(f"{q.id}:no")
        return out

    def consent_gate_satisfied(self) -> bool:
        return all(
            self.consent_answers.get(q.id) == q.expected_answer
            for q in self.bank.consent_questions
        )

    def _on_consent(self, event: Event) -> None:
        if event.type == "select":
            self._require(event.option_id in self._consent_option_ids(),
                          "UNKNOWN_OPTION", f"unknown consent option {event.option_id!r}")
            qid, answer = event.option_id.rsplit(":", 1)
            self.consent_answers[qid] = answer
        elif event.type == "deselect":
            self._require(event.option_id in self._consent_option_ids(),
                          "UNKNOWN_OPTION", f"unknown consent option {event.option_id!r}")
            qid, answer = event.option_id.rsplit(":", 1)
            if self.consent_answers.get(qid) == answer:
                del self.consent_answers[qid]
        elif event.type == "confirm":
            self._require(self.consent_gate_satisfied(), "CONSENT_GATE_UNSATISFIED",
                          "both comprehension questions and the agreement must be answered correctly")
            self.consent_confirmed_ts = event.ts
            self._transition(SessionState(StateKind.ENVIRONMENT, 1), event.ts)
        else:
            raise EventRejected("EVENT_INVALID_IN_STATE", f"{event.type} not valid during consent")

    def _on_environment(self, event: Event) -> None:
        if self.state.page == 1:  # volume check: completion is a plain confirm
            self._require(event.type == "confirm", "EVENT_INVALID_IN_STATE",
                          f"{event.type} not valid during the volume check")
            self._transition(SessionState(StateKind.ENVIRONMENT, 2), event.ts)
            return
        if event.type == "answer_environment":
            known = {q.id for q in self.bank.environment_questions}
            self._require(event.question_id in known, "UNKNOWN_OPTION",
                          f"unknown environment question {event.question_id!r}")
            self.environment_answers[event.question_id] = event.answer
        elif event.type == "confirm":
            missing = [q.id for q in self.bank.environment_questions
                       if q.id not in self.environment_answers]
            self._require(not missing, "SELECTION_REQUIRED",
                          f"environment questions unanswered: {missing}")
            self._transition(SessionState(StateKind.ORIENTATION, 1), event.ts)
        else:
            raise EventRejected("EVENT_INVALID_IN_STATE",
                                f"{event.type} not valid during the environment questions")

    def _orientation_commit(self, ts: float, timed_out: bool) -> None:
        q = self.state.page
        record = self.orientation_records[q - 1]
        record.selected_id = self.selections[0] if self.selections else None
        record.elapsed_seconds = max(0.0, ts - (self.state_entered_ts or ts))
        record.timed_out = timed_out or record.timed_out
        record.committed = True
        if q < ORIENTATION_QUESTIONS:
            self._transition(SessionState(StateKind.ORIENTATION, q + 1), ts)
        else:
            self._transition(SessionState(StateKind.WORD_PRESENTATION, 1), ts)

    def _on_orientation(self, event: Event) -> None:
        option_set = self.option_sets[("orientation", self.state.page)]
        if event.type == "select":
            self._require(option_set.option_by_id(event.option_id) is not None,
                          "UNKNOWN_OPTION", f"unknown option {event.option_id!r}")
            self.selections = [event.option_id]
        elif event.type == "deselect":
            if event.option_id in self.selections:
                self.selections = []
        elif event.type == "confirm":
            self._require(bool(self.selections), "SELECTION_REQUIRED",
                          "select an answer before confirming")
            self._orientation_commit(event.ts, timed_out=False)
        elif event.type == "timeout_elapsed":
            q = self.state.page
            self.timeout_events.append({"state": self.state_key(), "ts": event.ts})
            record = self.orientation_records[q - 1]
            record.timed_out = True
            if self.config.timeout_mode == TIMEOUT_AUTO_ADVANCE:
                # Legacy behavior: the screen changes at the limit; whatever is
                # currently tapped counts, nothing tapped counts as unanswered.
                self._orientation_commit(event.ts, timed_out=True)
        else:
            raise EventRejected("EVENT_INVALID_IN_STATE",
                                f"{event.type} not valid during orientation")

    def _on_word_presentation(self, event: Event) -> None:
        self._require(event.type == "confirm", "EVENT_INVALID_IN_STATE",
                      f"{event.type} not valid during word presentation")
        self._transition(SessionState(StateKind.WORD_SELECTION, self.state.page), event.ts)

    def _on_word_selection(self, event: Event) -> None:
        cycle = self.state.page
        option_set = self.option_sets[("word_selection", cycle)]
        if event.type == "select":
            self._require(option_set.option_by_id(event.option_id) is not None,
                          "UNKNOWN_OPTION", f"unknown option {event.option_id!r}")
            if event.option_id not in self.selections:
                self._require(len(self.selections) < WORD_SELECTION_SIZE, "SELECTION_LIMIT",
                              f"at most {WORD_SELECTION_SIZE} words can be selected")
                self.selections.append(event.option_id)
        elif event.type == "deselect":
            if event.option_id in self.selections:
                self.selections.remove(event.option_id)
        elif event.type == "confirm":
            self._require(len(self.selections) == WORD_SELECTION_SIZE, "SELECTION_REQUIRED",
                          f"exactly {WORD_SELECTION_SIZE} words must be selected")
            all_correct = set(self.selections) == set(option_set.correct_ids())
            self.word_cycles.append(
                {"cycle": cycle, "selected_ids": list(self.selections), "all_correct": all_correct}
            )
            if all_correct or cycle >= MAX_PRESENTATION_CYCLES:
                self._transition(SessionState(StateKind.CLOCK_NUMBERS), event.ts)
            else:
                self._transition(SessionState(StateKind.WORD_PRESENTATION, cycle + 1), event.ts)
        else:
            raise EventRejected("EVENT_INVALID_IN_STATE",
                                f"{event.type} not valid during word selection")

    def _on_clock_numbers(self, event: Event) -> None:
        if event.type == "clock_tap":
            self._pending_tap = (event.x, event.y)
        elif event.type == "number_entered":
            self._require(self._pending_tap is not None, "CLOCK_NO_PENDING",
                          "tap a location before entering a number")
            self._pending_value = event.value
        elif event.type == "element_confirmed":
            self._require(self._pending_tap is not None and self._pending_value is not None,
                          "CLOCK_NO_PENDING", "nothing to confirm: tap and enter a number first")
            self._element_counter += 1
            self.clock_numbers.append(
                {
                    "id": f"n{self._element_counter}",
                    "value": self._pending_value,
                    "x": self._pending_tap[0],
                    "y": self._pending_tap[1],
                }
            )
            self._pending_tap = None
            self._pending_value = None
        elif event.type == "number_moved":
            target = next((n for n in self.clock_numbers if n["id"] == event.element_id), None)
            self._require(target is not None, "UNKNOWN_ELEMENT",
                          f"no placed number with id {event.element_id!r}")
            target["x"] = event.x
            target["y"] = event.y
        elif event.type == "number_deleted":
            before = len(self.clock_numbers)
            self.clock_numbers = [n for n in self.clock_numbers if n["id"] != event.element_id]
            self._require(len(self.clock_numbers) < before, "UNKNOWN_ELEMENT",
                          f"no placed number with id {event.element_id!r}")
        elif event.type == "confirm":
            self._pending_tap = None
            self._pending_value = None
            self._transition(SessionState(StateKind.CLOCK_HANDS), event.ts)
        else:
            raise EventRejected("EVENT_INVALID_IN_STATE",
                                f"{event.type} not valid while placing clock numbers")

    def _on_clock_hands(self, event: Event) -> None:
        if event.type == "hand_drawn":
            self._pending_stroke = (event.x1, event.y1, event.x2, event.y2)
        elif event.type == "element_confirmed":
            self._require(self._pending_stroke is not None, "CLOCK_NO_PENDING",
                          "draw a hand before confirming it")
            self._element_counter += 1
            x1, y1, x2, y2 = self._pending_stroke
            self.clock_hands.append({"id": f"h{self._element_counter}", "x1": x1, "y1": y1, "x2": x2, "y2": y2})
            self._pending_stroke = None
        elif event.type == "confirm":
            self._pending_stroke = None
            self._transition(SessionState(StateKind.DELAYED_RECALL), event.ts)
        else:
            raise EventRejected("EVENT_INVALID_IN_STATE",
                                f"{event.type} not valid while drawing clock hands")

    def _on_delayed_recall(self, event: Event) -> None:
        option_set = self.option_sets[("delayed_recall", 1)]
        if event.type == "select":
            self._require(option_set.option_by_id(event.option_id) is not None,
                          "UNKNOWN_OPTION", f"unknown option {event.option_id!r}")
            if event.option_id not in self.selections:
                self._require(len(self.selections) < WORD_SELECTION_SIZE, "SELECTION_LIMIT",
                              f"at most {WORD_SELECTION_SIZE} words can be selected")
                self.selections.append(event.option_id)
        elif event.type == "deselect":
            if event.option_id in self.selections:
                self.selections.remove(event.option_id)
        elif event.type == "confirm":
            # The subject may remember fewer than five words; confirming any
            # number up to five is allowed here, unlike registration.
            self.recall_selection = list(self.selections)
            self.recall_committed = True
            self._transition(SessionState(StateKind.STORY_PRESENTATION), event.ts)
        else:
            raise EventRejected("EVENT_INVALID_IN_STATE",
                                f"{event.type} not valid during delayed recall")

    def _on_story_presentation(self, event: Event) -> None:
        self._require(event.type == "confirm", "EVENT_INVALID_IN_STATE",
                      f"{event.type} not valid during the story presentation")
        self._transition(SessionState(StateKind.STORY_STEP, 1), event.ts)

    def _on_story_step(self, event: Event) -> None:
        step = self.state.page
        option_set = self.option_sets[("story_step", step)]
        if event.type == "select":
            self._require(option_set.option_by_id(event.option_id) is not None,
                          "UNKNOWN_OPTION", f"unknown option {event.option_id!r}")
            self.selections = [event.option_id]
        elif event.type == "deselect":
            if event.option_id in self.selections:
                self.selections = []
        elif event.type == "confirm":
            self._require(bool(self.selections), "SELECTION_REQUIRED",
                          "select a story component before confirming")
            self.story_selections.append(self.selections[0])
            if step < STORY_STEPS:
                self._transition(SessionState(StateKind.STORY_STEP, step + 1), event.ts)
            else:
                self._exit_subtest(event.ts)
                self._transition(SessionState(StateKind.FINISHED), event.ts)
        else:
            raise EventRejected("EVENT_INVALID_IN_STATE",
                                f"{event.type} not valid during a story step")

    # -- screen projection ---------------------------------------------------

    def current_screen(self) -> Screen:
        if self.is_terminal():
            raise SessionStateError("SESSION_TERMINAL",
                                    "the session is finished; fetch the report instead")
        ui = _ui(self.bank.locale)
        state = self.state
        key = _progress_key(state)
        progress = SCREEN_ORDER.index(key) + 1
        speech = self.config.speech

        def segments(texts: list[str]) -> tuple[SpeechSegment, ...]:
            return speech_schedule(texts, speech.rate, speech.inter_utterance_pause)

        if state.kind == StateKind.CONSENT:
            options = []
            selected = []
            for q in self.bank.consent_questions:
                options.append({"id": f"{q.id}:yes", "text": ui["yes"]})
                options.append({"id": f"{q.id}:no", "text": ui["no"]})
                if q.id in self.consent_answers:
                    selected.append(f"{q.id}:{self.consent_answers[q.id]}")
            wrong = [
                q.id for q in self.bank.consent_questions
                if q.id in self.consent_answers
                and self.consent_answers[q.id] != q.expected_answer
            ]
            return Screen(
                kind="consent",
                instruction=ui["consent"],
                speech_segments=segments([ui["consent"]] + [q.text for q in self.bank.consent_questions]),
                options=tuple(options),
                input_mode="buttons",
                min_selections=len(self.bank.consent_questions),
                max_selections=len(self.bank.consent_questions),
                confirm_enabled=self.consent_gate_satisfied(),
                soft_time_limit=None,
                progress_current=progress,
                progress_total=SCREEN_TOTAL,
                selected=tuple(selected),
                feedback=ui["consent_feedback"] if wrong else None,
                extra={"questions": [{"id": q.id, "text": q.text} for q in self.bank.consent_questions]},
            )

        if state.kind == StateKind.ENVIRONMENT and state.page == 1:
            return Screen(
                kind="volume_check",
                instruction=ui["volume_check"],
                speech_segments=segments([ui["volume_check"]]),
                options=(),
                input_mode="none",
                min_selections=0,
                max_selections=0,
                confirm_enabled=True,
                soft_time_limit=None,
                progress_current=progress,
                progress_total=SCREEN_TOTAL,
                extra={"hint": "device_volume_buttons"},
            )

        if state.kind == StateKind.ENVIRONMENT:
            selected = [f"{qid}:{a}" for qid, a in self.environment_answers.items()]
            all_answered = all(
                q.id in self.environment_answers for q in self.bank.environment_questions
            )
            return Screen(
                kind="environment_state",
                instruction=ui["environment_state"],
                speech_segments=segments([ui["environment_state"]]
                                         + [q.text for q in self.bank.environment_questions]),
                options=(),
                input_mode="buttons",
                min_selections=len(self.bank.environment_questions),
                max_selections=len(self.bank.environment_questions),
                confirm_enabled=all_answered,
                soft_time_limit=None,
                progress_current=progress,
                progress_total=SCREEN_TOTAL,
                selected=tuple(sorted(selected)),
                extra={
                    "questions": [
                        {"id": q.id, "text": q.text} for q in self.bank.environment_questions
                    ],
                    "answer_labels": {"yes": ui["yes"], "no": ui["no"]},
                },
            )

        if state.kind == StateKind.ORIENTATION:
            q = state.page
            kind = ORIENTATION_KINDS[q - 1]
            option_set = self.option_sets[("orientation", q)]
            instruction = ui[f"orientation_{kind.value}"]
            return Screen(
                kind="orientation_question",
                instruction=instruction,
                speech_segments=segments([instruction]),
                options=tuple(option_set.public_options()),
                input_mode="buttons",
                min_selections=1,
                max_selections=1,
                confirm_enabled=len(self.selections) == 1,
                soft_time_limit=self.config.orientation_time_limit(q),
                progress_current=progress,
                progress_total=SCREEN_TOTAL,
                selected=tuple(self.selections),
                extra={"question_kind": kind.value, "question": q},
            )

        if state.kind == StateKind.WORD_PRESENTATION:
            retry = state.page > 1
            instruction = ui["word_presentation_retry"] if retry else ui["word_presentation"]
            words = [w.speech_text for w in self.bank.registration_words]
            return Screen(
                kind="word_presentation",
                instruction=instruction,
                speech_segments=segments(words),
                options=(),
                input_mode="none",
                min_selections=0,
                max_selections=0,
                confirm_enabled=True,
                soft_time_limit=None,
                progress_current=progress,
                progress_total=SCREEN_TOTAL,
                extra={
                    "cycle": state.page,
                    "max_cycles": MAX_PRESENTATION_CYCLES,
                    "words_shown": [w.text for w in self.bank.registration_words],
                },
            )

        if state.kind == StateKind.WORD_SELECTION:
            option_set = self.option_sets[("word_selection", state.page)]
            return Screen(
                kind="word_selection",
                instruction=ui["word_selection"],
                speech_segments=segments([ui["word_selection"]]),
                options=tuple(option_set.public_options()),
                input_mode="buttons",
                min_selections=WORD_SELECTION_SIZE,
                max_selections=WORD_SELECTION_SIZE,
                confirm_enabled=len(self.selections) == WORD_SELECTION_SIZE,
                soft_time_limit=None,
                progress_current=progress,
                progress_total=SCREEN_TOTAL,
                selected=tuple(self.selections),
                extra={"cycle": state.page, "max_cycles": MAX_PRESENTATION_CYCLES},
            )

        if state.kind == StateKind.CLOCK_NUMBERS:
            pending = None
            if self._pending_tap is not None:
                pending = {"x": self._pending_tap[0], "y": self._pending_tap[1],
                           "value": self._pending_value}
            return Screen(
                kind="clock_numbers",
                instruction=ui["clock_numbers"],
                speech_segments=segments([ui["clock_numbers"]]),
                options=(),
                input_mode="clock_canvas",
                min_selections=0,
                max_selections=0,
                confirm_enabled=True,
                soft_time_limit=None,
                progress_current=progress,
                progress_total=SCREEN_TOTAL,
                extra={"numbers": [dict(n) for n in self.clock_numbers], "pending": pending,
                       "number_pad_max": NUMBER_PAD_MAX_VALUE},
            )

        if state.kind == StateKind.CLOCK_HANDS:
            pending = None
            if self._pending_stroke is not None:
                x1, y1, x2, y2 = self._pending_stroke
                pending = {"x1": x1, "y1": y1, "x2": x2, "y2": y2}
            return Screen(
                kind="clock_hands",
                instruction=ui["clock_hands"],
                speech_segments=segments([ui["clock_hands"]]),
                options=(),
                input_mode="clock_canvas",
                min_selections=0,
                max_selections=0,
                confirm_enabled=True,
                soft_time_limit=None,
                progress_current=progress,
                progress_total=SCREEN_TOTAL,
                extra={"numbers": [dict(n) for n in self.clock_numbers],
                       "hands": [dict(h) for h in self.clock_hands],
                       "pending_stroke": pending},
            )

        if state.kind == StateKind.DELAYED_RECALL:
            option_set = self.option_sets[("delayed_recall", 1)]
            return Screen(
                kind="delayed_recall",
                instruction=ui["delayed_recall"],
                speech_segments=segments([ui["delayed_recall"]]),
                options=tuple(option_set.public_options()),
                input_mode="buttons",
                min_selections=0,
                max_selections=WORD_SELECTION_SIZE,
                confirm_enabled=True,
                soft_time_limit=None,
                progress_current=progress,
                progress_total=SCREEN_TOTAL,
                selected=tuple(self.selections),
            )

        if state.kind == StateKind.STORY_PRESENTATION:
            return Screen(
                kind="story_presentation",
                instruction=ui["story_presentation"],
                speech_segments=segments([c.correct_text for c in self.bank.story]),
                options=(),
                input_mode="none",
                min_selections=0,
                max_selections=0,
                confirm_enabled=True,
                soft_time_limit=None,
                progress_current=progress,
                progress_total=SCREEN_TOTAL,
                extra={"story_shown": [c.correct_text for c in self.bank.story]},
            )

        # story_step
        step = state.page
        option_set = self.option_sets[("story_step", step)]
        story_so_far = []
        for i, selected_id in enumerate(self.story_selections):
            chosen = self.option_sets[("story_step", i + 1)].option_by_id(selected_id)
            if chosen is not None:
                story_so_far.append(chosen.text)
        instruction = ui["story_step_first"] if step == 1 else ui["story_step_next"]
        return Screen(
            kind="story_step",
            instruction=instruction,
            speech_segments=segments([instruction]),
            options=tuple(option_set.public_options()),
            input_mode="buttons",
            min_selections=1,
            max_selections=1,
            confirm_enabled=len(self.selections) == 1,
            soft_time_limit=None,
            progress_current=progress,
            progress_total=SCREEN_TOTAL,
            selected=tuple(self.selections),
            extra={"step": step, "total_steps": STORY_STEPS, "story_so_far": story_so_far},
        )

    # -- scoring -------------------------------------------------------------

    def _subtest_duration(self, subtest: str) -> float:
        entered = self.subtest_entered.get(subtest)
        if entered is None:
            return 0.0
        exited = self.subtest_exited.get(subtest, self.finished_ts or entered)
        return max(0.0, exited - entered)

    def clock_input(self) -> ClockInput:
        numbers = tuple(
            NumberPlacement(n["value"], Point(n["x"], n["y"]), n["id"]) for n in self.clock_numbers
        )
        hands = tuple(
            HandStroke(Point(h["x1"], h["y1"]), Point(h["x2"], h["y2"]), h["id"])
            for h in self.clock_hands
        )
        return ClockInput(numbers=numbers, hands=hands)

    def subtest_scores(self) -> dict[str, SubtestScore]:
        config = self.config
        responses = []
        for q in range(1, ORIENTATION_QUESTIONS + 1):
            record = self.orientation_records[q - 1]
            option_set = self.option_sets[("orientation", q)]
            limit = config.orientation_time_limit(q)
            responses.append(
                OrientationResponse(
                    question_kind=ORIENTATION_KINDS[q - 1].value,
                    option_set=option_set,
                    selected_id=record.selected_id if record.committed else None,
                    elapsed_seconds=record.elapsed_seconds,
                    timed_out=record.timed_out or record.elapsed_seconds > limit,
                )
            )
        orientation = score_orientation(
            responses,
            config,
            self._subtest_duration("orientation"),
            completed=all(r.committed for r in self.orientation_records),
        )

        first_cycle = next((c for c in self.word_cycles if c["cycle"] == 1), None)
        registration_set = self.option_sets[("word_selection", 1)]
        cycles_detail = []
        for entry in self.word_cycles:
            cycle_set = self.option_sets[("word_selection", entry["cycle"])]
            correct = cycle_set.correct_ids()
            cycles_detail.append(
                {
                    "cycle": entry["cycle"],
                    "selected_texts": [
                        (cycle_set.option_by_id(i).text if cycle_set.option_by_id(i) else i)
                        for i in entry["selected_ids"]
                    ],
                    "correct_count": len([i for i in entry["selected_ids"] if i in correct]),
                    "all_correct": entry["all_correct"],
                }
            )
        registration = score_word_selection(
            registration_set,
            first_cycle["selected_ids"] if first_cycle else [],
            config.registration_points_per_word,
            "word_registration",
            self._subtest_duration("word_registration"),
            extra_detail={
                "presentation_cycles": self.presentation_cycles,
                "cycles": cycles_detail,
            },
            completed=self.subtest_entered.get("clock_drawing") is not None,
        )

        clock_completed = self.subtest_entered.get("delayed_recall") is not None
        clock_result = score_clock(
            self.clock_input(),
            hand_points_each=config.hand_points_each,
            radial_max=config.clock_radial_max,
            inner_circle_radius=config.clock_inner_circle_radius,
        )
        clock = SubtestScore(
            subtest="clock_drawing",
            raw_points=clock_result.total,
            max_points=config.max_clock_total(),
            duration_seconds=round(self._subtest_duration("clock_drawing"), 3),
            detail={
                "score": clock_result.to_json_dict(),
                "input": self.clock_input().to_json_dict(),
            },
            completed=clock_completed,
        )

        recall = score_word_selection(
            self.option_sets[("delayed_recall", 1)],
            self.recall_selection,
            config.recall_points_per_word,
            "delayed_recall",
            self._subtest_duration("delayed_recall"),
            completed=self.recall_committed,
        )

        step_responses = [
            (self.option_sets[("story_step", i + 1)], selected_id)
            for i, selected_id in enumerate(self.story_selections)
        ]
        logical = score_logical_memory(
            list(self.bank.story),
            step_responses,
            config,
            self._subtest_duration("logical_memory"),
            completed=len(self.story_selections) == STORY_STEPS,
        )

        return {
            "orientation": orientation,
            "word_registration": registration,
            "clock_drawing": clock,
            "delayed_recall": recall,
            "logical_memory": logical,
        }

    # -- persistence ----------------------------------------------------------

    def to_meta_dict(self) -> dict:
        return {
            "schema_version": SESSION_SCHEMA_VERSION,
            "session_id": self.id,
            "seed": self.seed,
            "created_ts": self.created_ts,
            "demographics": {"age": self.demographics.age, "education": self.demographics.education},
            "config": self.config.to_json_dict(),
            "bank": serialize_item_bank(self.bank),
        }


def create_session(
    config: EngineConfig,
    bank: ItemBank,
    demographics: Demographics,
    seed: Optional[int] = None,
    session_id: Optional[str] = None,
    created_ts: Optional[float] = None,
) -> Session:
    """New session in the consent state with all option sets materialized."""
    violations = validate_item_bank(bank)
    if violations:
        raise SessionStateError("BANK_INVALID", f"item bank invalid: {violations[0].code}")
    config.validate(bank.story_target_word_total())
    if config.cutoffs.lookup(demographics.age, demographics.education) is None:
        raise DemographicsError(
            "DEMOGRAPHICS_UNBANDABLE",
            f"no cutoff band covers age {demographics.age}, education {demographics.education!r}",
        )
    if seed is None:
        seed = int.from_bytes(os.urandom(8), "big")
    if session_id is None:
        session_id = uuid.uuid4().hex
    if created_ts is None:
        created_ts = dt.datetime.now(tz=dt.timezone.utc).timestamp()
    return Session(
        config=config,
        bank=bank,
        demographics=demographics,
        seed=seed,
        session_id=session_id,
        created_ts=created_ts,
    )


def apply_event(session: Session, event: Event, received_ts: Optional[float] = None) -> Session:
    return session.apply(event, received_ts)


def handle_timeout(session: Session, now: float) -> Session:
    """Client-side timer fired: no-op on screens without a soft time limit."""
    if session.is_terminal():
        return session
    screen = session.current_screen()
    if screen.soft_time_limit is None:
        return session
    return session.apply(Event(type="timeout_elapsed", ts=now))


def finalize(session: Session, verify_replay: bool = True) -> ScoreReport:
    """Build reports for a finished or aborted session.

    With ``verify_replay`` the event log is folded from scratch and must
    reproduce the identical professional report.
    """
    if not session.is_terminal():
        raise SessionStateError("SESSION_IN_PROGRESS", "the session has not finished yet")
    report = build_reports(session)
    if verify_replay:
        replayed = replay_session(session.to_meta_dict(),
                                  [le.to_json_dict() for le in session.event_log])
        replayed_report = build_reports(replayed)
        if replayed_report.professional_bytes() != report.professional_bytes():
            raise ReplayMismatchError(
                "REPLAY_MISMATCH", "replayed event log produced a different professional report"
            )
    return report


def replay_session(meta: dict, event_docs: list[dict]) -> Session:
    """Rebuild a session from its persisted meta document and event log."""
    if meta.get("schema_version") != SESSION_SCHEMA_VERSION:
        raise SessionStateError(
            "SESSION_SCHEMA_UNSUPPORTED",
            f"unsupported session schema_version {meta.get('schema_version')!r}",
        )
    config = config_from_dict(meta["config"])
    bank = load_item_bank(meta["bank"])
    demographics = Demographics(
        age=int(meta["demographics"]["age"]),
        education=str(meta["demographics"]["education"]),
    )
    session = create_session(
        config=config,
        bank=bank,
        demographics=demographics,
        seed=int(meta["seed"]),
        session_id=str(meta["session_id"]),
        created_ts=float(meta["created_ts"]),
    )
    for doc in event_docs:
        event = parse_event(doc["event"])
        session.apply(event, received_ts=float(doc.get("received_ts", event.ts)))
    return session
