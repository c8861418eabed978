import datetime as dt
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from cogscreen.option_gen import (
    OptionGenError,
    QuestionKind,
    RandomSource,
    derive_substream_seed,
    gen_calendar_options,
    gen_country_options,
    gen_story_step_options,
    gen_word_options,
    gen_year_options,
    substream,
)

SEEDS_1000 = range(1, 1001)


def test_country_partition(bank):
    options = gen_country_options(bank.countries, RandomSource(1))
    texts = options.texts()
    assert len(texts) == 12
    assert len(set(texts)) == 12
    assert texts.count("Deutschland") == 1
    european = set(bank.countries.european)
    world = set(bank.countries.world)
    assert sum(1 for t in texts if t in european) == 7
    assert sum(1 for t in texts if t in world) == 4
    assert options.correct_texts() == {"Deutschland"}


def test_country_determinism(bank):
    a = gen_country_options(bank.countries, RandomSource(1))
    b = gen_country_options(bank.countries, RandomSource(1))
    assert a == b


def test_country_1000_seeds_partition_and_uniform_position(bank):
    positions = Counter()
    for seed in SEEDS_1000:
        options = gen_country_options(bank.countries, RandomSource(seed))
        texts = options.texts()
        european = set(bank.countries.european)
        world = set(bank.countries.world)
        assert len(set(texts)) == 12
        assert sum(1 for t in texts if t in european) == 7
        assert sum(1 for t in texts if t in world) == 4
        correct = [i for i, o in enumerate(options.options) if o.is_correct]
        assert len(correct) == 1
        positions[correct[0]] += 1
    n = len(SEEDS_1000)
    for position in range(12):
        assert abs(positions[position] / n - 1 / 12) < 0.05


def test_year_options_window():
    options = gen_year_options(2021, RandomSource(7))
    years = [int(t) for t in options.texts()]
    assert len(years) == 12
    assert len(set(years)) == 12
    assert all(2001 <= y <= 2041 for y in years)
    assert years.count(2021) == 1
    assert options.correct_texts() == {"2021"}


def test_year_determinism():
    assert gen_year_options(2021, RandomSource(7)) == gen_year_options(2021, RandomSource(7))


def test_year_1000_seeds_no_escape_no_duplicates():
    for seed in SEEDS_1000:
        options = gen_year_options(2021, RandomSource(seed))
        years = [int(t) for t in options.texts()]
        assert len(set(years)) == 12
        assert all(abs(y - 2021) <= 20 for y in years)


def test_year_range_guard():
    with pytest.raises(OptionGenError):
        gen_year_options(1850, RandomSource(1))


def test_month_options_calendar_order():
    options = gen_calendar_options(QuestionKind.MONTH, dt.date(2021, 3, 15), "de")
    assert options.texts()[0] == "Januar"
    assert len(options.options) == 12
    assert options.correct_texts() == {"März"}


def test_weekday_options():
    monday = dt.date(2021, 3, 15)
    assert monday.weekday() == 0
    options = gen_calendar_options(QuestionKind.WEEKDAY, monday, "de")
    assert len(options.options) == 7
    assert options.correct_texts() == {"Montag"}


def test_date_options_always_31():
    options = gen_calendar_options(QuestionKind.DATE, dt.date(2021, 2, 3), "de")
    assert len(options.options) == 31
    assert options.texts() == tuple(str(d) for d in range(1, 32))
    assert options.correct_texts() == {"3"}


def test_calendar_locale_fallback():
    options = gen_calendar_options(QuestionKind.MONTH, dt.date(2021, 3, 15), "fr")
    assert options.correct_texts() == {"March"}


def test_word_options_contain_targets(bank):
    options = gen_word_options(list(bank.registration_words), RandomSource(3))
    texts = options.texts()
    assert len(texts) == 16
    assert len(set(texts)) == 16
    for w in bank.registration_words:
        assert w.text in texts
    assert options.correct_texts() == set(bank.word_texts())


def test_word_options_determinism(bank):
    words = list(bank.registration_words)
    assert gen_word_options(words, RandomSource(3)) == gen_word_options(words, RandomSource(3))


def test_word_options_1000_seeds(bank):
    words = list(bank.registration_words)
    targets = set(bank.word_texts())
    for seed in SEEDS_1000:
        options = gen_word_options(words, RandomSource(seed))
        correct = [o for o in options.options if o.is_correct]
        assert len(correct) == 5
        assert {o.text for o in correct} == targets
        for o in options.options:
            if not o.is_correct:
                assert o.text not in targets


def test_word_options_insufficient_pool(bank):
    from cogscreen.item_bank import WordItem

    words = [WordItem(text=f"w{i}", speech_text=f"w{i}", related_distractors=("d1", "d2"))
             for i in range(5)]
    with pytest.raises(OptionGenError):
        gen_word_options(words, RandomSource(1))


def test_story_step_options(bank):
    component = bank.story[0]
    options = gen_story_step_options(component, RandomSource(9))
    assert len(options.options) == 6
    assert options.correct_texts() == {component.correct_text}
    assert set(options.texts()) == {component.correct_text, *component.distractors}


def test_story_step_determinism(bank):
    component = bank.story[0]
    assert gen_story_step_options(component, RandomSource(9)) == gen_story_step_options(
        component, RandomSource(9)
    )


def test_story_correct_position_uniform(bank):
    component = bank.story[4]
    positions = Counter()
    for seed in SEEDS_1000:
        options = gen_story_step_options(component, RandomSource(seed))
        (index,) = [i for i, o in enumerate(options.options) if o.is_correct]
        positions[index] += 1
    for position in range(6):
        assert abs(positions[position] / len(SEEDS_1000) - 1 / 6) < 0.05


def test_substream_derivation_is_frozen():
    # Golden values pin the derivation scheme across releases; a change here
    # would silently break replay of persisted sessions.
    assert derive_substream_seed(42, 1001) == 2118178871596074222
    assert derive_substream_seed(42, 1002) == 8234459667222951075
    assert derive_substream_seed(43, 1001) == 9322432650493762371


def test_substream_independence(bank):
    # Drawing (or not drawing) one screen's options never changes another's.
    direct = gen_word_options(list(bank.registration_words), substream(42, "delayed_recall", 1))
    _ = gen_country_options(bank.countries, substream(42, "orientation", 1))
    again = gen_word_options(list(bank.registration_words), substream(42, "delayed_recall", 1))
    assert direct == again


@given(seed=st.integers(min_value=0, max_value=2**64 - 1))
@settings(max_examples=200, deadline=None)
def test_property_country_counts_hold_for_any_seed(seed):
    from cogscreen.item_bank import load_bundled_bank

    bank = load_bundled_bank()
    options = gen_country_options(bank.countries, RandomSource(seed))
    assert len(options.options) == 12
    assert len(options.correct_ids()) == 1


@given(seed=st.integers(min_value=0, max_value=2**64 - 1),
       year=st.integers(min_value=1900, max_value=2200))
@settings(max_examples=200, deadline=None)
def test_property_year_window_holds_for_any_seed(seed, year):
    options = gen_year_options(year, RandomSource(seed))
    years = [int(t) for t in options.texts()]
    assert len(set(years)) == 12
    assert all(abs(y - year) <= 20 for y in years)
    assert sum(1 for o in options.options if o.is_correct) == 1
