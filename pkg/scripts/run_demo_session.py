#!/usr/bin/env python3
"""Run a scripted demo session and print a readable result summary.

Usage: python scripts/run_demo_session.py [--seed N] [--profile perfect|all-wrong|mixed]
"""

import argparse
import json

from cogscreen import load_bundled_bank, load_bundled_config
from cogscreen.simulate import Script, all_wrong_script, perfect_run_script, run_script


def mixed_script() -> Script:
    steps = [
        {"intent": "answer-correct"},
        {"intent": "answer-wrong"},
        {"intent": "wait", "seconds": 11},
        {"intent": "answer-correct"},
        {"intent": "answer-correct"},
        {"intent": "answer-wrong"},
        {"intent": "answer-wrong"},   # registration round 1
        {"intent": "answer-correct"},  # registration round 2
        {"intent": "answer-correct"},  # clock
        {"intent": "answer-correct"},  # recall
    ] + [{"intent": "answer-correct" if i % 3 else "answer-wrong"} for i in range(9)]
    return Script(steps=steps, name="mixed-demo")


PROFILES = {
    "perfect": perfect_run_script,
    "all-wrong": all_wrong_script,
    "mixed": mixed_script,
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--profile", choices=sorted(PROFILES), default="mixed")
    parser.add_argument("--json", action="store_true", help="dump the full professional report")
    args = parser.parse_args()

    bank = load_bundled_bank()
    config = load_bundled_config()
    result = run_script(bank, config, PROFILES[args.profile](), seed=args.seed)
    report = result.report.professional

    if args.json:
        print(json.dumps(report, indent=2, ensure_ascii=False))
        return

    print(f"session {report['session_id']}  seed={report['seed']}  profile={args.profile}")
    print(f"classification: {report['classification']}   total {report['total']}/{report['max_total']}")
    cut = report["cutoffs"]
    print(f"cutoffs (band {cut['band']}): mci {cut['mci_cutoff']}, dementia {cut['dementia_cutoff']}"
          f"{'  [NON-CLINICAL]' if cut['non_clinical'] else ''}")
    print(f"presentation cycles: {report['presentation_counts']['word_registration_cycles']}")
    for subtest in report["subtests"]:
        print(f"  {subtest['id']:<18} {subtest['raw_points']:>3}/{subtest['max_points']:<3}"
              f"  weight {subtest['weight']}  {subtest['duration_seconds']:.1f}s")
    flags = report["environment_flags"]
    if flags:
        print(f"environment flags: {flags}")


if __name__ == "__main__":
    main()
