"""Directory-backed session persistence.

One directory per session: an immutable ``meta.json`` written at creation
and an append-only ``events.ndjson``, one accepted event per line.  State
is never persisted; a restarted service replays the log.  Appends are
flushed and fsynced so a crash can lose at most the line being written,
and loading tolerates a truncated final line.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from .session import LoggedEvent


class StoreError(Exception):
    pass


class UnknownSessionError(StoreError):
    pass


class SessionStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _dir(self, session_id: str) -> Path:
        if not session_id or "/" in session_id or session_id.startswith("."):
            raise StoreError(f"invalid session id {session_id!r}")
        return self.root / session_id

    def exists(self, session_id: str) -> bool:
        return (self._dir(session_id) / "meta.json").exists()

    def list_ids(self) -> list[str]:
        if not self.root.exists():
            return []
        return sorted(p.name for p in self.root.iterdir() if (p / "meta.json").exists())

    def create(self, meta: dict) -> None:
        session_dir = self._dir(meta["session_id"])
        if session_dir.exists():
            raise StoreError(f"session {meta['session_id']} already exists")
        session_dir.mkdir(parents=True)
        tmp = session_dir / "meta.json.tmp"
        tmp.write_text(json.dumps(meta, ensure_ascii=False, sort_keys=True), encoding="utf-8")
        os.replace(tmp, session_dir / "meta.json")
        (session_dir / "events.ndjson").touch()

    def append_event(self, session_id: str, logged: LoggedEvent) -> None:
        path = self._dir(session_id) / "events.ndjson"
        if not path.exists():
            raise UnknownSessionError(f"unknown session {session_id}")
        line = json.dumps(logged.to_json_dict(), ensure_ascii=False, sort_keys=True)
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def load(self, session_id: str) -> tuple[dict, list[dict]]:
        """(meta, event docs); tolerates a partial trailing line after a crash."""
        session_dir = self._dir(session_id)
        meta_path = session_dir / "meta.json"
        if not meta_path.exists():
            raise UnknownSessionError(f"unknown session {session_id}")
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        events: list[dict] = []
        events_path = session_dir / "events.ndjson"
        if events_path.exists():
            for line in events_path.read_text(encoding="utf-8").splitlines():
                line = line.strip()
                if not line:
                    continue
                try:
                    events.append(json.loads(line))
                except json.JSONDecodeError:
                    break  # truncated tail from an interrupted append
        return meta, events

    def write_report(self, session_id: str, report_bytes: bytes) -> Path:
        session_dir = self._dir(session_id)
        if not session_dir.exists():
            raise UnknownSessionError(f"unknown session {session_id}")
        path = session_dir / "report.json"
        tmp = session_dir / "report.json.tmp"
        tmp.write_bytes(report_bytes)
        os.replace(tmp, path)
        return path

    def read_report(self, session_id: str) -> bytes | None:
        path = self._dir(session_id) / "report.json"
        return path.read_bytes() if path.exists() else None
