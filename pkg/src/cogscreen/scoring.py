"""Subtest scoring, total aggregation, cutoff classification and reports.

All functions here are pure: re-scoring a persisted session reproduces the
professional report byte for byte (see ``ScoreReport.professional_bytes``).
"""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Mapping, Sequence

from .config import EngineConfig, SUBTEST_IDS
from .item_bank import ItemBank, StoryComponent
from .option_gen import OptionSet

REPORT_SCHEMA_VERSION = 1


class Classification(str, Enum):
    NORMAL = "normal_cognition"
    MCI_RISK = "mci_risk"
    DEMENTIA_RISK = "dementia_risk"


class ScoringError(Exception):
    pass


SCORING_EXPLANATIONS = {
    "orientation": "Each of the five questions scores its configured points when the confirmed "
                   "choice is correct; wrong or unanswered questions score zero.",
    "word_registration": "One configured point per target word in the first confirmed selection; "
                         "re-presentation rounds are recorded but not scored.",
    "clock_drawing": "One point per correctly placed number, minus one per duplicate or number "
                     "above twelve, points per hand ending in a hand target area, and a bonus "
                     "point when both hands start at the center. The better of the upright and "
                     "rotation-aligned template scores counts; negatives are floored at zero "
                     "for the total.",
    "delayed_recall": "One configured point per target word in the confirmed selection.",
    "logical_memory": "Each correctly chosen story component scores its target-word count "
                      "(or one point per step in uniform mode).",
}


@dataclass(frozen=True)
class SubtestScore:
    subtest: str
    raw_points: int
    max_points: int
    duration_seconds: float
    detail: dict
    completed: bool = True

    def floored_raw(self) -> int:
        # Clock penalties may push raw below zero; aggregation floors at zero
        # so one subtest cannot erase another.
        return max(0, self.raw_points)


@dataclass(frozen=True)
class OrientationResponse:
    question_kind: str
    option_set: OptionSet
    selected_id: str | None
    elapsed_seconds: float
    timed_out: bool


def _selected_option(option_set: OptionSet, selected_id: str | None) -> dict:
    if selected_id is None:
        return {"selected_id": None, "selected_text": None, "correct": False}
    option = option_set.option_by_id(selected_id)
    if option is None:
        return {"selected_id": selected_id, "selected_text": None, "correct": False}
    return {"selected_id": option.id, "selected_text": option.text, "correct": option.is_correct}


def score_orientation(
    responses: Sequence[OrientationResponse],
    config: EngineConfig,
    duration_seconds: float,
    completed: bool = True,
) -> SubtestScore:
    if len(responses) != 5:
        raise ScoringError(f"orientation needs exactly 5 response slots, got {len(responses)}")
    ppq = config.orientation_points_per_question
    points = 0
    questions = []
    for i, resp in enumerate(responses):
        picked = _selected_option(resp.option_set, resp.selected_id)
        earned = ppq if picked["correct"] else 0
        points += earned
        questions.append(
            {
                "question": i + 1,
                "kind": resp.question_kind,
                **picked,
                "points": earned,
                "elapsed_seconds": round(resp.elapsed_seconds, 3),
                "time_limit_exceeded": resp.timed_out,
            }
        )
    return SubtestScore(
        subtest="orientation",
        raw_points=points,
        max_points=5 * ppq,
        duration_seconds=round(duration_seconds, 3),
        detail={"questions": questions},
        completed=completed,
    )


def score_word_selection(
    option_set: OptionSet,
    confirmed_ids: Iterable[str],
    points_per_word: int,
    subtest: str,
    duration_seconds: float,
    extra_detail: dict | None = None,
    completed: bool = True,
) -> SubtestScore:
    confirmed = list(confirmed_ids)
    if len(confirmed) > 5:
        raise ScoringError(f"{subtest}: at most 5 selections can be confirmed, got {len(confirmed)}")
    correct = option_set.correct_ids()
    hits = [cid for cid in confirmed if cid in correct]
    detail: dict[str, Any] = {
        "selections": [_selected_option(option_set, cid) for cid in confirmed],
        "correct_count": len(hits),
    }
    if extra_detail:
        detail.update(extra_detail)
    return SubtestScore(
        subtest=subtest,
        raw_points=points_per_word * len(hits),
        max_points=5 * points_per_word,
        duration_seconds=round(duration_seconds, 3),
        detail=detail,
        completed=completed,
    )


def score_logical_memory(
    story: Sequence[StoryComponent],
    step_responses: Sequence[tuple[OptionSet, str | None]],
    config: EngineConfig,
    duration_seconds: float,
    completed: bool = True,
) -> SubtestScore:
    if len(step_responses) > len(story):
        raise ScoringError("more story responses than story components")
    points = 0
    max_points = 0
    steps = []
    reconstructed: list[str] = []
    for i, component in enumerate(story):
        step_max = 1 if config.uniform_story_scoring else component.target_word_count
        max_points += step_max
        if i < len(step_responses):
            option_set, selected_id = step_responses[i]
            picked = _selected_option(option_set, selected_id)
            earned = step_max if picked["correct"] else 0
        else:
            picked = {"selected_id": None, "selected_text": None, "correct": False}
            earned = 0
        points += earned
        if picked["selected_text"]:
            reconstructed.append(picked["selected_text"])
        steps.append(
            {
                "step": component.ordinal,
                **picked,
                "points": earned,
                "step_max": step_max,
            }
        )
    return SubtestScore(
        subtest="logical_memory",
        raw_points=points,
        max_points=max_points,
        duration_seconds=round(duration_seconds, 3),
        detail={"steps": steps, "reconstructed_story": " ".join(reconstructed)},
        completed=completed,
    )


def aggregate_total(subtests: Mapping[str, SubtestScore], weights: Mapping[str, int]) -> tuple[int, int]:
    """Weighted (total, max_total) over the five subtests."""
    total = 0
    max_total = 0
    for subtest_id in SUBTEST_IDS:
        if subtest_id not in subtests:
            raise ScoringError(f"missing subtest score: {subtest_id}")
        score = subtests[subtest_id]
        weight = weights[subtest_id]
        total += weight * score.floored_raw()
        max_total += weight * score.max_points
    return total, max_total


def classify(total: int, config: EngineConfig, age: int, education: str) -> tuple[Classification, dict]:
    """Step classification: above mci -> normal, above dementia -> mci risk."""
    banded = config.cutoffs.lookup(age, education)
    if banded is None:
        raise ScoringError(
            f"DEMOGRAPHICS_UNBANDABLE: no cutoff band for age {age}, education {education!r}"
        )
    band_label, entry = banded
    if total > entry.mci_cutoff:
        result = Classification.NORMAL
    elif total > entry.dementia_cutoff:
        result = Classification.MCI_RISK
    else:
        result = Classification.DEMENTIA_RISK
    cutoff_info = {
        "band": band_label,
        "mci_cutoff": entry.mci_cutoff,
        "dementia_cutoff": entry.dementia_cutoff,
        "max_total": config.cutoffs.max_total,
        "non_clinical": config.cutoffs.non_clinical,
    }
    return result, cutoff_info


SUBJECT_TEXT_NORMAL = (
    "Das Testergebnis zeigt Hinweise auf eine normale geistige Leistungsfähigkeit. "
    "Bitte besprechen Sie das Ergebnis bei Fragen oder Sorgen mit Ihrer Ärztin oder Ihrem Arzt."
)
SUBJECT_TEXT_RISK = (
    "Das Testergebnis zeigt Hinweise auf ein mögliches Risiko einer Beeinträchtigung der "
    "geistigen Leistungsfähigkeit. Der Test allein stellt keine Diagnose. "
    "Bitte besprechen Sie das Ergebnis mit Ihrer Ärztin oder Ihrem Arzt."
)
SUBJECT_TEXT_ABORTED = (
    "Der Test wurde vorzeitig beendet, daher liegt kein Ergebnis vor. "
    "Bitte wenden Sie sich bei Fragen an Ihre Ärztin oder Ihren Arzt."
)


@dataclass(frozen=True)
class ScoreReport:
    professional: dict
    subject_summary: dict | None  # None when the disclosure policy is off

    def professional_bytes(self) -> bytes:
        return canonical_json_bytes(self.professional)

    def to_json_dict(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "professional": self.professional,
            "subject_summary": self.subject_summary,
        }


def canonical_json_bytes(doc: dict) -> bytes:
    return json.dumps(doc, sort_keys=True, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


def _iso_utc(ts: float | None) -> str | None:
    if ts is None:
        return None
    return dt.datetime.fromtimestamp(ts, tz=dt.timezone.utc).isoformat().replace("+00:00", "Z")


def build_reports(session, config: EngineConfig | None = None) -> ScoreReport:
    """Assemble the professional report (always) and subject summary (policy).

    ``session`` is a finished or aborted engine session; the report uses only
    persisted session data, so a replayed session produces identical bytes.
    """
    if not session.is_terminal():
        raise ScoringError("session still in progress; reports need a finished or aborted session")
    config = config or session.config
    bank: ItemBank = session.bank

    subtests = session.subtest_scores()
    total, max_total = aggregate_total(subtests, config.subtest_weights)
    classification, cutoff_info = classify(
        total, config, session.demographics.age, session.demographics.education
    )

    environment = []
    flagged = []
    for q in bank.environment_questions:
        answer = session.environment_answers.get(q.id)
        unremarkable = answer == q.expected_answer
        environment.append(
            {
                "id": q.id,
                "text": q.text,
                "answer": answer,
                "flagged": answer is not None and not unremarkable,
            }
        )
        if answer is not None and not unremarkable:
            flagged.append(q.id)

    consent = {
        "answers": [
            {
                "id": q.id,
                "text": q.text,
                "answer": session.consent_answers.get(q.id),
            }
            for q in bank.consent_questions
        ],
        "confirmed_at": _iso_utc(session.consent_confirmed_ts),
    }

    started = session.started_ts
    finished = session.finished_ts
    professional = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "report_kind": "professional",
        "session_id": session.id,
        "seed": session.seed,
        "locale": bank.locale,
        "aborted": session.is_aborted(),
        "classification": classification.value,
        "total": total,
        "max_total": max_total,
        "cutoffs": cutoff_info,
        "test_date": _iso_utc(session.created_ts)[:10] if session.created_ts else None,
        "start_time": _iso_utc(started),
        "total_duration_seconds": round(finished - started, 3) if started and finished else None,
        "age": session.demographics.age,
        "education": session.demographics.education,
        "environment": environment,
        "environment_flags": flagged,
        "consent": consent,
        "presentation_counts": {"word_registration_cycles": session.presentation_cycles},
        "timeout_mode": config.timeout_mode,
        "clock_skew_flags": session.clock_skew_flags,
        "subtests": [
            {
                "id": subtest_id,
                "raw_points": subtests[subtest_id].raw_points,
                "counted_points": subtests[subtest_id].floored_raw(),
                "max_points": subtests[subtest_id].max_points,
                "weight": config.subtest_weights[subtest_id],
                "weighted_points": config.subtest_weights[subtest_id] * subtests[subtest_id].floored_raw(),
                "duration_seconds": subtests[subtest_id].duration_seconds,
                "completed": subtests[subtest_id].completed,
                "scoring_explanation": SCORING_EXPLANATIONS[subtest_id],
                "detail": subtests[subtest_id].detail,
            }
            for subtest_id in SUBTEST_IDS
        ],
        "non_clinical_notice": (
            "Illustrative cutoff table; not clinically validated."
            if config.cutoffs.non_clinical
            else None
        ),
    }

    subject_summary = None
    if config.disclose_result_to_subject:
        if session.is_aborted():
            text = SUBJECT_TEXT_ABORTED
            outcome = "aborted"
        elif classification == Classification.NORMAL:
            text = SUBJECT_TEXT_NORMAL
            outcome = "normal_cognition"
        else:
            # Binary wording only: the subject never sees scores or the
            # MCI/dementia distinction.
            text = SUBJECT_TEXT_RISK
            outcome = "risk_of_impairment"
        subject_summary = {
            "schema_version": REPORT_SCHEMA_VERSION,
            "report_kind": "subject",
            "outcome": outcome,
            "text": text,
        }

    return ScoreReport(professional=professional, subject_summary=subject_summary)
