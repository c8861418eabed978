"""Engine configuration: scoring weights, cutoff table, timing and policy.

The shipped default configuration is illustrative and marked non-clinical;
running with ``clinical_mode`` requires an operator-supplied cutoff table
because the licensed instrument's real cutoffs are not public data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Any, Mapping

from .clock_scoring import (
    HAND_POINTS_EACH_DEFAULT,
    INNER_CIRCLE_RADIUS_DEFAULT,
    RADIAL_MAX_DEFAULT,
    max_clock_points,
)

CONFIG_SCHEMA_VERSION = 1

SUBTEST_IDS = (
    "orientation",
    "word_registration",
    "clock_drawing",
    "delayed_recall",
    "logical_memory",
)

TIMEOUT_RECORD_ONLY = "record_only"
TIMEOUT_AUTO_ADVANCE = "auto_advance"


class ConfigError(Exception):
    """Invalid or incomplete engine configuration."""

    def __init__(self, problems: list[str] | str):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = problems
        super().__init__("; ".join(problems))


@dataclass(frozen=True)
class AgeBand:
    lower: int  # inclusive
    upper: int  # inclusive


@dataclass(frozen=True)
class CutoffEntry:
    mci_cutoff: int
    dementia_cutoff: int


@dataclass(frozen=True)
class CutoffTable:
    """(age band, education band) -> cutoffs; bands partition their domains."""

    age_bands: tuple[AgeBand, ...]
    education_bands: tuple[str, ...]
    entries: Mapping[tuple[int, str], CutoffEntry]  # keyed by (age band index, education band)
    max_total: int
    non_clinical: bool = True

    def age_band_index(self, age: int) -> int | None:
        for i, band in enumerate(self.age_bands):
            if band.lower <= age <= band.upper:
                return i
        return None

    def lookup(self, age: int, education: str) -> tuple[str, CutoffEntry] | None:
        """Band label and cutoffs, or None when the demographics don't band."""
        idx = self.age_band_index(age)
        if idx is None or education not in self.education_bands:
            return None
        band = self.age_bands[idx]
        return f"{band.lower}-{band.upper}/{education}", self.entries[(idx, education)]

    def problems(self) -> list[str]:
        out = []
        if not self.age_bands:
            out.append("cutoffs: at least one age band required")
        for i, band in enumerate(self.age_bands):
            if band.lower > band.upper:
                out.append(f"cutoffs: age band {i} is empty ({band.lower} > {band.upper})")
            if i > 0 and band.lower != self.age_bands[i - 1].upper + 1:
                out.append("cutoffs: age bands must partition the age domain without gaps or overlap")
        if not self.education_bands:
            out.append("cutoffs: at least one education band required")
        if len(set(self.education_bands)) != len(self.education_bands):
            out.append("cutoffs: duplicate education bands")
        for i in range(len(self.age_bands)):
            for edu in self.education_bands:
                entry = self.entries.get((i, edu))
                if entry is None:
                    out.append(f"cutoffs: missing entry for age band {i}, education {edu!r}")
                    continue
                if not entry.dementia_cutoff < entry.mci_cutoff <= self.max_total:
                    out.append(
                        f"cutoffs: entry (band {i}, {edu!r}) must satisfy "
                        f"dementia < mci <= max_total, got {entry.dementia_cutoff}, "
                        f"{entry.mci_cutoff}, {self.max_total}"
                    )
                elif entry.dementia_cutoff < 0:
                    out.append(f"cutoffs: entry (band {i}, {edu!r}) has a negative dementia cutoff")
        return out


@dataclass(frozen=True)
class SpeechPolicy:
    rate: float = 0.40
    inter_utterance_pause: float = 0.5


@dataclass(frozen=True)
class EngineConfig:
    cutoffs: CutoffTable
    orientation_points_per_question: int = 2
    registration_points_per_word: int = 1
    recall_points_per_word: int = 4
    uniform_story_scoring: bool = False
    subtest_weights: Mapping[str, int] = field(
        default_factory=lambda: {
            "orientation": 1,
            "word_registration": 1,
            "clock_drawing": 1,
            "delayed_recall": 1,
            "logical_memory": 2,
        }
    )
    hand_points_each: int = HAND_POINTS_EACH_DEFAULT
    clock_radial_max: float = RADIAL_MAX_DEFAULT
    clock_inner_circle_radius: float = INNER_CIRCLE_RADIUS_DEFAULT
    orientation_time_limit_seconds: float = 10.0
    orientation_time_limit_overrides: Mapping[int, float] = field(default_factory=dict)
    timeout_mode: str = TIMEOUT_RECORD_ONLY
    disclose_result_to_subject: bool = False
    clinical_mode: bool = False
    speech: SpeechPolicy = field(default_factory=SpeechPolicy)

    def orientation_time_limit(self, question_ordinal: int) -> float:
        return self.orientation_time_limit_overrides.get(
            question_ordinal, self.orientation_time_limit_seconds
        )

    def max_clock_total(self) -> int:
        return max_clock_points(self.hand_points_each)

    def subtest_max_points(self, story_target_word_total: int) -> dict[str, int]:
        """Raw maximum per subtest for a given bank's story."""
        story_max = 9 if self.uniform_story_scoring else story_target_word_total
        return {
            "orientation": 5 * self.orientation_points_per_question,
            "word_registration": 5 * self.registration_points_per_word,
            "clock_drawing": self.max_clock_total(),
            "delayed_recall": 5 * self.recall_points_per_word,
            "logical_memory": story_max,
        }

    def max_total(self, story_target_word_total: int) -> int:
        maxima = self.subtest_max_points(story_target_word_total)
        return sum(self.subtest_weights[s] * maxima[s] for s in SUBTEST_IDS)

    def problems(self, story_target_word_total: int | None = None) -> list[str]:
        out = list(self.cutoffs.problems())
        for s in SUBTEST_IDS:
            if s not in self.subtest_weights:
                out.append(f"missing subtest weight for {s!r}")
            elif self.subtest_weights[s] < 0:
                out.append(f"subtest weight for {s!r} must be non-negative")
        for name, value in (
            ("orientation_points_per_question", self.orientation_points_per_question),
            ("registration_points_per_word", self.registration_points_per_word),
            ("recall_points_per_word", self.recall_points_per_word),
            ("hand_points_each", self.hand_points_each),
        ):
            if value < 0:
                out.append(f"{name} must be non-negative")
        if self.timeout_mode not in (TIMEOUT_RECORD_ONLY, TIMEOUT_AUTO_ADVANCE):
            out.append(f"unknown timeout_mode {self.timeout_mode!r}")
        if self.clinical_mode and self.cutoffs.non_clinical:
            out.append(
                "clinical_mode requires an operator-supplied cutoff table "
                "(the bundled table is illustrative and marked non-clinical)"
            )
        if not 0 < self.speech.rate <= 1:
            out.append("speech rate must be in (0, 1]")
        if story_target_word_total is not None:
            computed = self.max_total(story_target_word_total)
            if computed != self.cutoffs.max_total:
                out.append(
                    f"cutoff table max_total {self.cutoffs.max_total} does not match the "
                    f"configured scoring maximum {computed} for this bank"
                )
        return out

    def validate(self, story_target_word_total: int | None = None) -> None:
        problems = self.problems(story_target_word_total)
        if problems:
            raise ConfigError(problems)

    def to_json_dict(self) -> dict:
        return {
            "schema_version": CONFIG_SCHEMA_VERSION,
            "scoring": {
                "orientation_points_per_question": self.orientation_points_per_question,
                "registration_points_per_word": self.registration_points_per_word,
                "recall_points_per_word": self.recall_points_per_word,
                "uniform_story_scoring": self.uniform_story_scoring,
                "subtest_weights": dict(self.subtest_weights),
            },
            "clock": {
                "hand_points_each": self.hand_points_each,
                "radial_max": self.clock_radial_max,
                "inner_circle_radius": self.clock_inner_circle_radius,
            },
            "timing": {
                "orientation_time_limit_seconds": self.orientation_time_limit_seconds,
                "orientation_time_limit_overrides": {
                    str(k): v for k, v in self.orientation_time_limit_overrides.items()
                },
                "timeout_mode": self.timeout_mode,
            },
            "speech": {
                "rate": self.speech.rate,
                "inter_utterance_pause": self.speech.inter_utterance_pause,
            },
            "disclosure": {"result_to_subject": self.disclose_result_to_subject},
            "clinical_mode": self.clinical_mode,
            "cutoffs": {
                "non_clinical": self.cutoffs.non_clinical,
                "max_total": self.cutoffs.max_total,
                "age_bands": [[b.lower, b.upper] for b in self.cutoffs.age_bands],
                "education_bands": list(self.cutoffs.education_bands),
                "entries": [
                    {
                        "age_band": [self.cutoffs.age_bands[i].lower, self.cutoffs.age_bands[i].upper],
                        "education": edu,
                        "mci_cutoff": entry.mci_cutoff,
                        "dementia_cutoff": entry.dementia_cutoff,
                    }
                    for (i, edu), entry in sorted(self.cutoffs.entries.items())
                ],
            },
        }


def _parse_cutoffs(doc: dict) -> CutoffTable:
    age_bands = tuple(AgeBand(int(lo), int(hi)) for lo, hi in doc.get("age_bands", []))
    education_bands = tuple(str(e) for e in doc.get("education_bands", []))
    entries: dict[tuple[int, str], CutoffEntry] = {}
    band_index = {(b.lower, b.upper): i for i, b in enumerate(age_bands)}
    for entry in doc.get("entries", []):
        key = tuple(int(v) for v in entry["age_band"])
        idx = band_index.get(key)
        if idx is None:
            raise ConfigError(f"cutoff entry references unknown age band {key}")
        entries[(idx, str(entry["education"]))] = CutoffEntry(
            mci_cutoff=int(entry["mci_cutoff"]),
            dementia_cutoff=int(entry["dementia_cutoff"]),
        )
    return CutoffTable(
        age_bands=age_bands,
        education_bands=education_bands,
        entries=entries,
        max_total=int(doc.get("max_total", 0)),
        non_clinical=bool(doc.get("non_clinical", True)),
    )


def config_from_dict(doc: dict) -> EngineConfig:
    version = doc.get("schema_version")
    if version != CONFIG_SCHEMA_VERSION:
        raise ConfigError(f"unsupported config schema_version {version!r}")
    scoring = doc.get("scoring", {})
    clock = doc.get("clock", {})
    timing = doc.get("timing", {})
    speech = doc.get("speech", {})
    cutoffs_doc = doc.get("cutoffs")
    if not cutoffs_doc:
        raise ConfigError("CONFIG_INCOMPLETE: cutoff table is required")
    config = EngineConfig(
        cutoffs=_parse_cutoffs(cutoffs_doc),
        orientation_points_per_question=int(scoring.get("orientation_points_per_question", 2)),
        registration_points_per_word=int(scoring.get("registration_points_per_word", 1)),
        recall_points_per_word=int(scoring.get("recall_points_per_word", 4)),
        uniform_story_scoring=bool(scoring.get("uniform_story_scoring", False)),
        subtest_weights={
            str(k): int(v)
            for k, v in scoring.get(
                "subtest_weights",
                {
                    "orientation": 1,
                    "word_registration": 1,
                    "clock_drawing": 1,
                    "delayed_recall": 1,
                    "logical_memory": 2,
                },
            ).items()
        },
        hand_points_each=int(clock.get("hand_points_each", HAND_POINTS_EACH_DEFAULT)),
        clock_radial_max=float(clock.get("radial_max", RADIAL_MAX_DEFAULT)),
        clock_inner_circle_radius=float(clock.get("inner_circle_radius", INNER_CIRCLE_RADIUS_DEFAULT)),
        orientation_time_limit_seconds=float(timing.get("orientation_time_limit_seconds", 10.0)),
        orientation_time_limit_overrides={
            int(k): float(v) for k, v in timing.get("orientation_time_limit_overrides", {}).items()
        },
        timeout_mode=str(timing.get("timeout_mode", TIMEOUT_RECORD_ONLY)),
        disclose_result_to_subject=bool(doc.get("disclosure", {}).get("result_to_subject", False)),
        clinical_mode=bool(doc.get("clinical_mode", False)),
        speech=SpeechPolicy(
            rate=float(speech.get("rate", 0.40)),
            inter_utterance_pause=float(speech.get("inter_utterance_pause", 0.5)),
        ),
    )
    config.validate()
    return config


def load_config(path: str | Path) -> EngineConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config document: {exc}") from exc
    return config_from_dict(doc)


def bundled_config_path() -> Path:
    return Path(__file__).parent / "data" / "default_config.json"


def load_bundled_config() -> EngineConfig:
    """The illustrative default configuration (non-clinical cutoffs)."""
    return load_config(bundled_config_path())
