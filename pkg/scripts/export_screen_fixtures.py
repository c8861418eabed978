#!/usr/bin/env python3
"""Record one Screen JSON fixture per screen kind for UI contract tests.

Walks a deterministic session (fixed seed and creation time) through every
screen kind and writes the serialized Screen documents to
frontend/fixtures/screens/.

Usage: python scripts/export_screen_fixtures.py [--out frontend/fixtures/screens]
"""

import argparse
import json
from pathlib import Path

from cogscreen import load_bundled_bank, load_bundled_config
from cogscreen.session import Demographics, Event, create_session


class Walker:
    def __init__(self, session):
        self.session = session
        self.now = session.created_ts
        self.fixtures = {}

    def snap(self):
        screen = self.session.current_screen()
        self.fixtures.setdefault(screen.kind, screen.to_json_dict())

    def post(self, event_type, **fields):
        self.now += 2.0
        self.session.apply(Event(type=event_type, ts=self.now, **fields))

    def select_first(self, n=1):
        for option in self.session.current_screen().options[:n]:
            self.post("select", option_id=option["id"])


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="frontend/fixtures/screens")
    args = parser.parse_args()

    bank = load_bundled_bank()
    config = load_bundled_config()
    session = create_session(config, bank, Demographics(age=70, education="secondary"),
                             seed=42, session_id="fixture", created_ts=1615800000.0)
    w = Walker(session)

    w.snap()  # consent
    for q in bank.consent_questions:
        w.post("select", option_id=f"{q.id}:{q.expected_answer}")
    w.post("confirm")
    w.snap()  # volume_check
    w.post("confirm")
    w.snap()  # environment_state
    for q in bank.environment_questions:
        w.post("answer_environment", question_id=q.id, answer=q.expected_answer)
    w.post("confirm")
    w.snap()  # orientation_question
    for _ in range(5):
        w.select_first()
        w.post("confirm")
    w.snap()  # word_presentation
    w.post("confirm")
    w.snap()  # word_selection
    correct = session.option_sets[("word_selection", 1)].correct_ids()
    for option_id in sorted(correct):
        w.post("select", option_id=option_id)
    w.post("confirm")
    w.post("clock_tap", x=0.0, y=0.85)
    w.post("number_entered", value=12)
    w.post("element_confirmed")
    w.snap()  # clock_numbers, with one committed number
    w.post("confirm")
    w.post("hand_drawn", x1=0.0, y1=0.0, x2=0.35, y2=0.61)
    w.post("element_confirmed")
    w.snap()  # clock_hands, with one committed hand
    w.post("confirm")
    w.snap()  # delayed_recall
    w.post("confirm")
    w.snap()  # story_presentation
    w.post("confirm")
    w.snap()  # story_step

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for kind, doc in sorted(w.fixtures.items()):
        path = out / f"{kind}.json"
        path.write_text(json.dumps(doc, indent=2, ensure_ascii=False, sort_keys=True) + "\n",
                        encoding="utf-8")
        print(f"wrote {path}")
    print(f"{len(w.fixtures)} screen kinds")


if __name__ == "__main__":
    main()
