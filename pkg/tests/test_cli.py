import json
import subprocess
import sys
from pathlib import Path

import pytest

from cogscreen.item_bank import bundled_bank_path

SCRIPTS_DIR = Path(__file__).resolve().parents[1] / "src" / "cogscreen" / "data" / "scripts"


def run_cli(*args, check=True):
    result = subprocess.run(
        [sys.executable, "-m", "cogscreen.cli", *args],
        capture_output=True,
        timeout=120,
    )
    if check and result.returncode != 0:
        raise AssertionError(f"cli failed: {result.stderr.decode()}")
    return result


def test_validate_bank_ok():
    result = run_cli("validate-bank", "--bank", str(bundled_bank_path()))
    assert b"valid" in result.stdout


def test_validate_bank_reports_violations(tmp_path):
    doc = json.loads(bundled_bank_path().read_text(encoding="utf-8"))
    doc["story"] = doc["story"][:8]
    bad = tmp_path / "bad_bank.json"
    bad.write_text(json.dumps(doc), encoding="utf-8")
    result = run_cli("validate-bank", "--bank", str(bad), check=False)
    assert result.returncode == 1
    assert b"STORY_LENGTH" in result.stdout


def test_validate_bank_json_output(tmp_path):
    doc = json.loads(bundled_bank_path().read_text(encoding="utf-8"))
    doc["countries"]["european"] = doc["countries"]["european"][:5]
    bad = tmp_path / "bad_bank.json"
    bad.write_text(json.dumps(doc), encoding="utf-8")
    result = run_cli("validate-bank", "--bank", str(bad), "--json", check=False)
    assert result.returncode == 1
    body = json.loads(result.stdout)
    assert body["valid"] is False
    assert any(v["code"] == "INSUFFICIENT_EU_COUNTRIES" for v in body["violations"])


def test_simulate_perfect_run():
    result = run_cli("simulate", "--script", str(SCRIPTS_DIR / "perfect_run.json"), "--seed", "42")
    report = json.loads(result.stdout)
    assert report["total"] == report["max_total"] == 80
    assert report["classification"] == "normal_cognition"


def test_simulate_all_wrong_run():
    result = run_cli("simulate", "--script", str(SCRIPTS_DIR / "all_wrong_run.json"), "--seed", "42")
    report = json.loads(result.stdout)
    assert report["total"] == 0
    assert report["classification"] == "dementia_risk"
    assert report["presentation_counts"]["word_registration_cycles"] == 3


def test_simulate_is_deterministic():
    a = run_cli("simulate", "--script", str(SCRIPTS_DIR / "perfect_run.json"),
                "--seed", "7", "--session-id", "fixed").stdout
    b = run_cli("simulate", "--script", str(SCRIPTS_DIR / "perfect_run.json"),
                "--seed", "7", "--session-id", "fixed").stdout
    assert a == b


def test_rescore_reproduces_simulated_report(tmp_path):
    store = tmp_path / "sessions"
    simulated = run_cli(
        "simulate", "--script", str(SCRIPTS_DIR / "perfect_run.json"),
        "--seed", "9", "--store", str(store), "--session-id", "sim-9",
    )
    rescored = run_cli("rescore", "--session", str(store / "sim-9"))
    assert rescored.stdout == simulated.stdout
    assert rescored.returncode == 0


def test_rescore_detects_tampered_report(tmp_path):
    store = tmp_path / "sessions"
    run_cli("simulate", "--script", str(SCRIPTS_DIR / "perfect_run.json"),
            "--seed", "11", "--store", str(store), "--session-id", "sim-11")
    report_path = store / "sim-11" / "report.json"
    doc = json.loads(report_path.read_text(encoding="utf-8"))
    doc["total"] = 12
    report_path.write_text(json.dumps(doc), encoding="utf-8")
    result = run_cli("rescore", "--session", str(store / "sim-11"), check=False)
    assert result.returncode != 0


def test_rescore_rejects_unfinished_session(tmp_path, bank, config, make_session):
    from cogscreen.store import SessionStore
    from session_helpers import Ticker, pass_consent

    store = SessionStore(tmp_path / "sessions")
    session = make_session()
    ticker = Ticker()
    pass_consent(session, ticker)
    store.create(session.to_meta_dict())
    for logged in session.event_log:
        store.append_event(session.id, logged)
    result = run_cli("rescore", "--session", str(tmp_path / "sessions" / session.id), check=False)
    assert result.returncode != 0
    assert b"in progress" in result.stderr


def test_simulate_report_written_to_file(tmp_path):
    out = tmp_path / "report.json"
    result = run_cli("simulate", "--script", str(SCRIPTS_DIR / "all_wrong_run.json"),
                     "--seed", "3", "--out", str(out))
    assert out.read_bytes() + b"\n" == result.stdout


def test_help_lists_verbs():
    result = run_cli("--help")
    for verb in (b"serve", b"simulate", b"rescore", b"validate-bank"):
        assert verb in result.stdout
