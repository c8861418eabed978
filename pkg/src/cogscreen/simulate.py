"""Scripted session driver.

A simulation script is a seed-independent list of abstract intents that are
resolved against the session's materialized option sets, so the same script
exercises any seed:

    {"schema_version": 1, "steps": [
        {"intent": "answer-correct"},
        {"intent": "answer-wrong"},
        {"intent": "select-texts", "texts": ["Apfel", "Brot"]},
        {"intent": "clock-input", "numbers": [...], "hands": [...]},
        {"intent": "wait", "seconds": 11},
        {"intent": "abort"}
    ]}

Structural screens (consent, volume check, environment questions, item
presentations) are handled automatically; question screens consume one
intent each.  On the clock, ``answer-correct`` enters a flawless clock and
``answer-wrong`` leaves it empty; an explicit ``clock-input`` document covers
both clock screens.  ``answer-environment`` overrides the default
unremarkable environment answers when placed before the question screens
are reached.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .clock_scoring import perfect_clock_input
from .config import EngineConfig
from .item_bank import ItemBank
from .scoring import ScoreReport
from .session import (
    Demographics,
    Event,
    Session,
    create_session,
    finalize,
)
from .store import SessionStore

SCRIPT_SCHEMA_VERSION = 1
DEFAULT_CREATED_TS = 1615800000.0  # fixed epoch so scripted runs are reproducible
DEFAULT_DEMOGRAPHICS = Demographics(age=70, education="secondary")
EVENT_STEP_SECONDS = 2.0


class ScriptError(Exception):
    pass


@dataclass
class Script:
    steps: list[dict]
    name: str = ""

    @classmethod
    def from_dict(cls, doc: dict) -> "Script":
        if not isinstance(doc, dict) or doc.get("schema_version") != SCRIPT_SCHEMA_VERSION:
            raise ScriptError("script must be an object with schema_version 1")
        steps = doc.get("steps")
        if not isinstance(steps, list):
            raise ScriptError("script requires a 'steps' list")
        return cls(steps=[dict(s) for s in steps], name=str(doc.get("name", "")))

    @classmethod
    def load(cls, path: str | Path) -> "Script":
        try:
            return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        except json.JSONDecodeError as exc:
            raise ScriptError(f"malformed script: {exc}") from exc


def perfect_run_script() -> Script:
    # 5 orientation + 1 registration + 1 clock + 1 recall + 9 story steps.
    return Script(steps=[{"intent": "answer-correct"} for _ in range(17)], name="perfect-run")


def all_wrong_script() -> Script:
    # Failing registration repeats the presentation, so its selection screen
    # consumes three intents before the session moves on.
    return Script(steps=[{"intent": "answer-wrong"} for _ in range(19)], name="all-wrong")


class _Clock:
    def __init__(self, start: float):
        self.now = start

    def tick(self, seconds: float = EVENT_STEP_SECONDS) -> float:
        self.now += seconds
        return self.now


@dataclass
class SimulationResult:
    session: Session
    report: ScoreReport
    report_path: Optional[Path] = None


class _Driver:
    def __init__(self, session: Session, script: Script, store: Optional[SessionStore]):
        self.session = session
        self.script = script
        self.store = store
        self.clock = _Clock(session.created_ts)
        self.cursor = 0
        self.pending_hands: Optional[list[dict]] = None
        self.environment_overrides: dict[str, str] = {}

    def _post(self, event_type: str, **fields) -> None:
        event = Event(type=event_type, ts=self.clock.tick(), **fields)
        self.session.apply(event)
        if self.store is not None:
            self.store.append_event(self.session.id, self.session.event_log[-1])

    def _next_intent(self, expected: tuple[str, ...]) -> dict:
        # Skip over control intents (wait / abort / answer-environment) that
        # apply before the next question screen.
        while self.cursor < len(self.script.steps):
            step = self.script.steps[self.cursor]
            intent = step.get("intent")
            if intent == "wait":
                self.cursor += 1
                seconds = float(step.get("seconds", 0))
                self.clock.tick(seconds)
                screen = self.session.current_screen()
                if screen.soft_time_limit is not None and seconds >= screen.soft_time_limit:
                    self._post("timeout_elapsed")
                    if self.session.is_terminal() or self.session.current_screen().kind != screen.kind:
                        return {"intent": "__handled__"}
                continue
            if intent == "abort":
                self.cursor += 1
                self._post("abort")
                return {"intent": "__handled__"}
            if intent == "answer-environment":
                self.cursor += 1
                self.environment_overrides.update(step.get("answers", {}))
                continue
            if intent not in expected:
                raise ScriptError(
                    f"intent {intent!r} cannot answer a {self.session.current_screen().kind} screen"
                )
            self.cursor += 1
            return step
        raise ScriptError(
            f"script exhausted at screen {self.session.current_screen().kind!r} "
            f"(state {self.session.state_key()})"
        )

    def _answer_choice(self, screen, step: dict) -> None:
        intent = step["intent"]
        option_sets = self.session.option_sets
        state = self.session.state
        if screen.kind == "orientation_question":
            option_set = option_sets[("orientation", state.page)]
        elif screen.kind == "word_selection":
            option_set = option_sets[("word_selection", state.page)]
        elif screen.kind == "delayed_recall":
            option_set = option_sets[("delayed_recall", 1)]
        else:
            option_set = option_sets[("story_step", state.page)]

        want = screen.min_selections if screen.min_selections > 0 else (
            5 if screen.kind in ("word_selection", "delayed_recall") else 1
        )
        if intent == "select-texts":
            texts = step.get("texts", [])
            ids = [o.id for o in option_set.options if o.text in texts]
            if len(ids) != len(texts):
                raise ScriptError(f"select-texts: not all of {texts} appear on this screen")
        elif intent == "answer-correct":
            ids = sorted(option_set.correct_ids(),
                         key=lambda i: [o.id for o in option_set.options].index(i))[:want]
        else:  # answer-wrong
            ids = [o.id for o in option_set.options if not o.is_correct][:want]
        for option_id in ids:
            self._post("select", option_id=option_id)
        self._post("confirm")

    def _enter_clock_numbers(self, step: dict) -> None:
        intent = step["intent"]
        if intent == "clock-input":
            numbers = step.get("numbers", [])
            self.pending_hands = list(step.get("hands", []))
        elif intent == "answer-correct":
            doc = perfect_clock_input().to_json_dict()
            numbers = doc["numbers"]
            self.pending_hands = doc["hands"]
        else:  # answer-wrong: empty clock
            numbers = []
            self.pending_hands = []
        for n in numbers:
            self._post("clock_tap", x=float(n["x"]), y=float(n["y"]))
            self._post("number_entered", value=int(n["value"]))
            self._post("element_confirmed")
        self._post("confirm")

    def _enter_clock_hands(self) -> None:
        for h in self.pending_hands or []:
            self._post("hand_drawn", x1=float(h["x1"]), y1=float(h["y1"]),
                       x2=float(h["x2"]), y2=float(h["y2"]))
            self._post("element_confirmed")
        self.pending_hands = None
        self._post("confirm")

    def run(self) -> None:
        guard = 0
        while not self.session.is_terminal():
            guard += 1
            if guard > 500:
                raise ScriptError("simulation did not terminate; script likely inconsistent")
            screen = self.session.current_screen()
            kind = screen.kind
            if kind == "consent":
                for q in self.session.bank.consent_questions:
                    self._post("select", option_id=f"{q.id}:{q.expected_answer}")
                self._post("confirm")
            elif kind in ("volume_check", "word_presentation", "story_presentation"):
                self._post("confirm")
            elif kind == "environment_state":
                for q in self.session.bank.environment_questions:
                    answer = self.environment_overrides.get(q.id, q.expected_answer)
                    self._post("answer_environment", question_id=q.id, answer=answer)
                self._post("confirm")
            elif kind in ("orientation_question", "word_selection", "delayed_recall", "story_step"):
                step = self._next_intent(("answer-correct", "answer-wrong", "select-texts"))
                if step["intent"] != "__handled__":
                    self._answer_choice(screen, step)
            elif kind == "clock_numbers":
                step = self._next_intent(("answer-correct", "answer-wrong", "clock-input"))
                if step["intent"] != "__handled__":
                    self._enter_clock_numbers(step)
            elif kind == "clock_hands":
                self._enter_clock_hands()
            else:
                raise ScriptError(f"simulator cannot drive screen kind {kind!r}")


def run_script(
    bank: ItemBank,
    config: EngineConfig,
    script: Script,
    seed: int,
    demographics: Demographics = DEFAULT_DEMOGRAPHICS,
    store: Optional[SessionStore] = None,
    session_id: Optional[str] = None,
    created_ts: float = DEFAULT_CREATED_TS,
) -> SimulationResult:
    """Drive a full session from a script and return the finished report."""
    session = create_session(
        config=config,
        bank=bank,
        demographics=demographics,
        seed=seed,
        session_id=session_id,
        created_ts=created_ts,
    )
    if store is not None:
        store.create(session.to_meta_dict())
    driver = _Driver(session, script, store)
    driver.run()
    report = finalize(session)
    report_path = None
    if store is not None:
        report_path = store.write_report(session.id, report.professional_bytes())
    return SimulationResult(session=session, report=report, report_path=report_path)
