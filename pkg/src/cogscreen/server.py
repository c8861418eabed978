"""HTTP session service.

Wire contract (all JSON, every document carries a schema_version):

    GET  /health
    POST /sessions                      {age, education, seed?}  -> 201 {session_id, screen}
    GET  /sessions/{id}/screen          -> Screen
    POST /sessions/{id}/events          Event -> {status, screen} | {status, report}
    GET  /sessions/{id}/report?audience=subject|professional

The professional report requires the operator bearer token when one is
configured; the subject summary is served only when the disclosure policy
is enabled.  Events for one session are applied under a per-session lock
and persisted before the response, so a crashed service replays to the
exact screen the client last saw.
"""

from __future__ import annotations

import datetime as dt
import threading
from typing import Optional

from fastapi import FastAPI, Header, Request
from fastapi.responses import JSONResponse

from .config import EngineConfig
from .item_bank import ItemBank
from .scoring import build_reports
from .session import (
    Demographics,
    EventParseError,
    EventRejected,
    Session,
    SessionError,
    create_session,
    parse_event,
    replay_session,
)
from .store import SessionStore, UnknownSessionError

API_SCHEMA_VERSION = 1


def _error(status_code: int, code: str, message: str, **extra) -> JSONResponse:
    body = {"schema_version": API_SCHEMA_VERSION, "error": code, "message": message}
    body.update(extra)
    return JSONResponse(status_code=status_code, content=body)


class SessionRegistry:
    """In-memory cache of live sessions over the store, with per-session locks."""

    def __init__(self, bank: ItemBank, config: EngineConfig, store: SessionStore):
        self.bank = bank
        self.config = config
        self.store = store
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def lock_for(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            if session_id not in self._locks:
                self._locks[session_id] = threading.Lock()
            return self._locks[session_id]

    def create(self, demographics: Demographics, seed: Optional[int]) -> Session:
        session = create_session(self.config, self.bank, demographics, seed=seed)
        self.store.create(session.to_meta_dict())
        with self._registry_lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._registry_lock:
            if session_id in self._sessions:
                return self._sessions[session_id]
        meta, events = self.store.load(session_id)  # raises UnknownSessionError
        session = replay_session(meta, events)
        with self._registry_lock:
            return self._sessions.setdefault(session_id, session)


def create_app(
    bank: ItemBank,
    config: EngineConfig,
    store: SessionStore,
    operator_token: Optional[str] = None,
) -> FastAPI:
    app = FastAPI(title="cogscreen session service", docs_url=None, redoc_url=None)
    registry = SessionRegistry(bank, config, store)
    app.state.registry = registry
    app.state.operator_token = operator_token

    def ready() -> bool:
        return registry.bank is not None and registry.config is not None

    @app.get("/health")
    def health():
        return {
            "schema_version": API_SCHEMA_VERSION,
            "status": "ok" if ready() else "unavailable",
            "locale": registry.bank.locale,
            "non_clinical": registry.config.cutoffs.non_clinical,
        }

    @app.post("/sessions", status_code=201)
    async def create_session_endpoint(request: Request):
        if not ready():
            return _error(503, "SERVICE_NOT_READY", "item bank or configuration not loaded")
        try:
            body = await request.json()
        except Exception:
            return _error(422, "BODY_MALFORMED", "request body must be a JSON object")
        if not isinstance(body, dict):
            return _error(422, "BODY_MALFORMED", "request body must be a JSON object")
        try:
            age = int(body["age"])
            education = str(body["education"])
        except (KeyError, TypeError, ValueError):
            return _error(400, "BODY_INVALID", "body requires integer 'age' and string 'education'")
        seed = body.get("seed")
        if seed is not None and not isinstance(seed, int):
            return _error(400, "BODY_INVALID", "'seed' must be an integer when given")
        try:
            session = registry.create(Demographics(age=age, education=education), seed)
        except SessionError as exc:
            return _error(400, exc.code, str(exc))
        return {
            "schema_version": API_SCHEMA_VERSION,
            "session_id": session.id,
            "screen": session.current_screen().to_json_dict(),
        }

    def _load_session(session_id: str) -> Session | JSONResponse:
        try:
            return registry.get(session_id)
        except UnknownSessionError:
            return _error(404, "SESSION_UNKNOWN", f"no session {session_id!r}")

    @app.get("/sessions/{session_id}/screen")
    def get_screen(session_id: str):
        session = _load_session(session_id)
        if isinstance(session, JSONResponse):
            return session
        if session.is_terminal():
            return _error(
                410, "SESSION_TERMINAL", "the session has ended; fetch the report",
                report_url=f"/sessions/{session_id}/report",
                session_status="aborted" if session.is_aborted() else "finished",
            )
        return session.current_screen().to_json_dict()

    @app.post("/sessions/{session_id}/events")
    async def post_event(session_id: str, request: Request):
        session = _load_session(session_id)
        if isinstance(session, JSONResponse):
            return session
        try:
            body = await request.json()
        except Exception:
            return _error(422, "EVENT_MALFORMED", "event must be a JSON object")
        try:
            event = parse_event(body)
        except EventParseError as exc:
            return _error(422, exc.code, str(exc))
        received_ts = dt.datetime.now(tz=dt.timezone.utc).timestamp()
        with registry.lock_for(session_id):
            try:
                session.apply(event, received_ts=received_ts)
            except EventRejected as exc:
                screen = None
                if not session.is_terminal():
                    screen = session.current_screen().to_json_dict()
                return _error(409, exc.code, str(exc), screen=screen)
            # Persist before acknowledging; the in-memory state is already
            # updated, and a crash after fsync replays to this same state.
            registry.store.append_event(session_id, session.event_log[-1])
            if session.is_terminal():
                report = build_reports(session)
                registry.store.write_report(session_id, report.professional_bytes())
                return {
                    "schema_version": API_SCHEMA_VERSION,
                    "status": "aborted" if session.is_aborted() else "finished",
                    "report_url": f"/sessions/{session_id}/report",
                }
            return {
                "schema_version": API_SCHEMA_VERSION,
                "status": "in_progress",
                "screen": session.current_screen().to_json_dict(),
            }

    @app.get("/sessions/{session_id}/report")
    def get_report(
        session_id: str,
        audience: str = "professional",
        authorization: Optional[str] = Header(default=None),
    ):
        session = _load_session(session_id)
        if isinstance(session, JSONResponse):
            return session
        if not session.is_terminal():
            return _error(409, "SESSION_IN_PROGRESS", "the session has not finished yet")
        if audience not in ("subject", "professional"):
            return _error(400, "AUDIENCE_INVALID", "audience must be 'subject' or 'professional'")
        report = build_reports(session)
        if audience == "professional":
            token = app.state.operator_token
            if token:
                supplied = (authorization or "").removeprefix("Bearer ").strip()
                if supplied != token:
                    return _error(401, "OPERATOR_TOKEN_REQUIRED",
                                  "professional reports require the operator bearer token")
            return report.professional
        if report.subject_summary is None:
            return _error(403, "DISCLOSURE_DISABLED",
                          "result disclosure to the subject is disabled by policy")
        return report.subject_summary

    return app
