"""Append-only run ledger: every prompt, retrieval, tool call and model
exchange lands here before the pipeline proceeds (write-ahead discipline).

One JSONL stream per run at runs/{run_id}.jsonl, one event per line with
fields exactly (event_id, session_id, kind, payload, ts). Replay mode pins
the clock so repeated scripted runs produce byte-identical ledgers.
"""
from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .errors import SessionNotFound

EVENT_KINDS = (
    "user_prompt",
    "retrieval",
    "model_request",
    "model_response",
    "tool_call",
    "tool_result",
    "error",
)

_REQUIRED_PAYLOAD_KEYS = {
    "user_prompt": {"text"},
    "retrieval": {"query", "chunks"},
    "model_request": {"request"},
    "model_response": {"content"},
    "tool_call": {"call_id", "tool_name", "arguments"},
    "tool_result": {"call_id", "tool_name", "result", "is_error"},
    "error": {"message"},
}

REPLAY_EPOCH = 0.0


def replay_clock() -> float:
    return REPLAY_EPOCH


@dataclass(frozen=True)
class AuditEvent:
    event_id: int
    session_id: str
    kind: str
    payload: dict
    ts: float

    def to_json(self) -> str:
        record = {
            "event_id": self.event_id,
            "session_id": self.session_id,
            "kind": self.kind,
            "payload": self.payload,
            "ts": self.ts,
        }
        return json.dumps(record, sort_keys=False, separators=(",", ":"), ensure_ascii=False)


class AuditLog:
    """Per-run append-only event streams under a runs/ directory."""

    def __init__(self, root: str | Path, clock: Callable[[], float] | None = None):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._clock = clock or time.time
        self._lock = threading.Lock()
        self._events: dict[str, list[AuditEvent]] = {}

    def path_for(self, session_id: str) -> Path:
        return self.root / f"{session_id}.jsonl"

    def open_session(self, session_id: str) -> None:
        with self._lock:
            self._events.setdefault(session_id, [])

    def record(self, session_id: str, kind: str, payload: dict) -> int:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        missing = _REQUIRED_PAYLOAD_KEYS[kind] - payload.keys()
        if missing:
            raise ValueError(f"{kind} payload missing keys {sorted(missing)}")
        with self._lock:
            stream = self._events.setdefault(session_id, [])
            event = AuditEvent(
                event_id=len(stream) + 1,
                session_id=session_id,
                kind=kind,
                payload=payload,
                ts=self._clock(),
            )
            stream.append(event)
            line = event.to_json() + "\n"
            with open(self.path_for(session_id), "a", encoding="utf-8") as fh:
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())
        return event.event_id

    def events(self, session_id: str) -> list[AuditEvent]:
        with self._lock:
            if session_id not in self._events:
                raise SessionNotFound(session_id)
            return list(self._events[session_id])

    def content_hash(self, session_id: str) -> str:
        path = self.path_for(session_id)
        if not path.exists():
            raise SessionNotFound(session_id)
        return hashlib.sha256(path.read_bytes()).hexdigest()

    def export_run(self, session_id: str, dest: str | Path | None = None) -> Path:
        """The self-contained ledger file for a finished run; optionally copied."""
        path = self.path_for(session_id)
        if session_id not in self._events and not path.exists():
            raise SessionNotFound(session_id)
        if dest is None:
            return path
        dest = Path(dest)
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_bytes(path.read_bytes())
        return dest


def import_run(path: str | Path) -> list[AuditEvent]:
    """Parse a ledger file back into events, checking id monotonicity."""
    events = []
    last_id = 0
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            event = AuditEvent(rec["event_id"], rec["session_id"], rec["kind"],
                               rec["payload"], rec["ts"])
            if event.event_id != last_id + 1:
                raise ValueError(
                    f"non-consecutive event_id {event.event_id} after {last_id}"
                )
            if event.kind not in EVENT_KINDS:
                raise ValueError(f"unknown event kind {event.kind!r}")
            last_id = event.event_id
            events.append(event)
    return events
