#!/usr/bin/env python3
"""Empirical position frequencies of the correct option across seeds.

Shuffling must not leak the answer through its screen position; this
prints the observed frequency of the correct option at each position for
the country and story-step generators.

Usage: python scripts/option_position_stats.py [--n 10000]
"""

import argparse
from collections import Counter

from cogscreen import load_bundled_bank
from cogscreen.option_gen import RandomSource, gen_country_options, gen_story_step_options


def frequencies(generate, count, positions):
    hits = Counter()
    for seed in range(1, count + 1):
        options = generate(RandomSource(seed)).options
        (index,) = [i for i, o in enumerate(options) if o.is_correct]
        hits[index] += 1
    return [hits[i] / count for i in range(positions)]


def show(label, freqs, expected):
    worst = max(abs(f - expected) for f in freqs)
    print(f"{label}: expected {expected:.4f} per position, "
          f"worst deviation {worst:.4f}")
    print("  " + "  ".join(f"{f:.3f}" for f in freqs))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=10000)
    args = parser.parse_args()

    bank = load_bundled_bank()
    show(
        "country (12 options)",
        frequencies(lambda rng: gen_country_options(bank.countries, rng), args.n, 12),
        1 / 12,
    )
    show(
        "story step (6 options)",
        frequencies(lambda rng: gen_story_step_options(bank.story[0], rng), args.n, 6),
        1 / 6,
    )


if __name__ == "__main__":
    main()
