"""Operator command line: serve, simulate, rescore, validate-bank."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .config import ConfigError, bundled_config_path, load_config
from .item_bank import (
    ItemBankParseError,
    ItemBankValidationError,
    bundled_bank_path,
    load_item_bank,
    validate_item_bank,
    _build_bank,
    _read_document,
)
from .scoring import build_reports, canonical_json_bytes
from .session import replay_session
from .simulate import Script, ScriptError, run_script
from .store import SessionStore, UnknownSessionError


@click.group()
def main():
    """Self-administered cognitive screening engine."""


_bank_option = click.option(
    "--bank", "bank_path", envvar="COGSCREEN_BANK",
    default=str(bundled_bank_path()), show_default="bundled sample bank",
    help="Path to the item-bank JSON document.",
)
_config_option = click.option(
    "--config", "config_path", envvar="COGSCREEN_CONFIG",
    default=str(bundled_config_path()), show_default="bundled illustrative config",
    help="Path to the engine configuration JSON document.",
)


def _load_inputs(bank_path: str, config_path: str):
    try:
        bank = load_item_bank(bank_path)
    except (ItemBankParseError, ItemBankValidationError) as exc:
        raise click.ClickException(f"item bank: {exc}")
    try:
        config = load_config(config_path)
        config.validate(bank.story_target_word_total())
    except ConfigError as exc:
        raise click.ClickException(f"config: {exc}")
    return bank, config


@main.command()
@_bank_option
@_config_option
@click.option("--store", "store_dir", envvar="COGSCREEN_STORE", default="./sessions",
              show_default=True, help="Directory for persisted sessions.")
@click.option("--host", envvar="COGSCREEN_HOST", default="127.0.0.1", show_default=True)
@click.option("--port", envvar="COGSCREEN_PORT", default=8470, show_default=True, type=int)
@click.option("--token", envvar="COGSCREEN_OPERATOR_TOKEN", default=None,
              help="Operator bearer token guarding professional reports.")
def serve(bank_path, config_path, store_dir, host, port, token):
    """Run the HTTP session service."""
    import uvicorn

    from .server import create_app

    bank, config = _load_inputs(bank_path, config_path)
    app = create_app(bank, config, SessionStore(store_dir), operator_token=token)
    click.echo(f"serving on http://{host}:{port} (store: {store_dir})", err=True)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@_bank_option
@_config_option
@click.option("--script", "script_path", required=True, type=click.Path(exists=True),
              help="Simulation script (JSON intents).")
@click.option("--seed", required=True, type=int, help="Session seed.")
@click.option("--store", "store_dir", default=None,
              help="Persist the simulated session into this store directory.")
@click.option("--session-id", default=None, help="Explicit session id.")
@click.option("--out", "out_path", default=None, type=click.Path(),
              help="Also write the professional report to this file.")
def simulate(bank_path, config_path, script_path, seed, store_dir, session_id, out_path):
    """Drive a full scripted session and print the professional report."""
    bank, config = _load_inputs(bank_path, config_path)
    try:
        script = Script.load(script_path)
    except ScriptError as exc:
        raise click.ClickException(str(exc))
    store = SessionStore(store_dir) if store_dir else None
    try:
        result = run_script(bank, config, script, seed, store=store, session_id=session_id)
    except ScriptError as exc:
        raise click.ClickException(str(exc))
    payload = result.report.professional_bytes()
    if out_path:
        Path(out_path).write_bytes(payload)
    sys.stdout.buffer.write(payload + b"\n")


@main.command()
@click.option("--session", "session_dir", required=True, type=click.Path(exists=True),
              help="A persisted session directory (meta.json + events.ndjson).")
@click.option("--out", "out_path", default=None, type=click.Path(),
              help="Write the recomputed professional report to this file.")
def rescore(session_dir, out_path):
    """Re-run scoring on a persisted session; must reproduce the stored report."""
    session_path = Path(session_dir)
    store = SessionStore(session_path.parent)
    try:
        meta, events = store.load(session_path.name)
    except UnknownSessionError as exc:
        raise click.ClickException(str(exc))
    session = replay_session(meta, events)
    if not session.is_terminal():
        raise click.ClickException(
            f"session {session.id} is still in progress (state {session.state_key()})"
        )
    report = build_reports(session)
    payload = report.professional_bytes()
    stored = store.read_report(session_path.name)
    if out_path:
        Path(out_path).write_bytes(payload)
    sys.stdout.buffer.write(payload + b"\n")
    if stored is not None and stored != payload:
        raise click.ClickException("recomputed report differs from the stored report")


@main.command("validate-bank")
@click.option("--bank", "bank_path", required=True, type=click.Path(exists=True),
              help="Path to the item-bank JSON document.")
@click.option("--json", "as_json", is_flag=True, help="Emit the violation list as JSON.")
def validate_bank(bank_path, as_json):
    """Validate an item bank and list every violated invariant."""
    try:
        bank = _build_bank(_read_document(bank_path))
    except ItemBankParseError as exc:
        raise click.ClickException(str(exc))
    violations = validate_item_bank(bank)
    if as_json:
        doc = {
            "schema_version": 1,
            "valid": not violations,
            "violations": [
                {"code": v.code, "path": v.path, "message": v.message} for v in violations
            ],
        }
        sys.stdout.buffer.write(canonical_json_bytes(doc) + b"\n")
    else:
        if violations:
            for v in violations:
                click.echo(f"{v.code}  {v.path}: {v.message}")
        else:
            click.echo("item bank is valid")
    if violations:
        sys.exit(1)


if __name__ == "__main__":
    main()
