"""Self-administered touch-based cognitive screening engine.

Consent-gated, event-sourced test sessions over five subtests (orientation,
word registration, clock drawing, delayed recall, logical memory) with
seeded answer-option generation, geometric clock scoring, cutoff-based
classification and dual-audience reporting.
"""

from .clock_scoring import (
    ClockInput,
    ClockScore,
    ClockTemplate,
    HandStroke,
    NumberPlacement,
    Point,
    align_rotation,
    build_template,
    judge_number,
    normalize_input,
    perfect_clock_input,
    score_clock,
    score_hands,
    score_numbers,
)
from .config import ConfigError, CutoffTable, EngineConfig, load_bundled_config, load_config
from .item_bank import (
    ItemBank,
    ItemBankParseError,
    ItemBankValidationError,
    load_bundled_bank,
    load_item_bank,
    serialize_item_bank,
    validate_item_bank,
)
from .option_gen import (
    OptionSet,
    QuestionKind,
    RandomSource,
    gen_calendar_options,
    gen_country_options,
    gen_story_step_options,
    gen_word_options,
    gen_year_options,
    substream,
)
from .scoring import (
    Classification,
    ScoreReport,
    SubtestScore,
    aggregate_total,
    build_reports,
    classify,
    score_logical_memory,
    score_orientation,
    score_word_selection,
)
from .session import (
    Demographics,
    Event,
    EventRejected,
    Screen,
    Session,
    apply_event,
    create_session,
    finalize,
    handle_timeout,
    parse_event,
    replay_session,
)
from .store import SessionStore

__version__ = "0.1.0"
