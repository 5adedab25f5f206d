"""Append-only session persistence.

Each session owns one JSONL event log named by its random 128-bit id.
The log is the source of truth: replaying it through the deterministic
engine reconstructs the exact in-memory state, so a restarted service
recovers every session by replay.

Only user input events matter for replay (Started, Answered, Revised);
the rule firings and score updates between them are re-derived.  They
are still logged for audit.  A torn trailing line (interrupted write) is
dropped; a malformed complete line means real corruption and the log is
quarantined.
"""

from __future__ import annotations

import json
import secrets
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping

from .engine import Session, UNKNOWN, Value, start_session
from .explain import revise_answer
from .model import KnowledgeBase

#: Event kinds that appear in a session log.
EVENT_KINDS = ("Started", "QuestionAsked", "Answered", "Revised",
               "RuleFired", "ScoreUpdated", "Finished")


@dataclass(frozen=True)
class SessionEvent:
    seq: int
    kind: str
    payload: dict
    timestamp: str  # UTC, ISO-8601


class CorruptSessionLog(Exception):
    def __init__(self, session_id: str, reason: str):
        self.session_id = session_id
        super().__init__(f"session {session_id}: {reason}")


def new_session_id() -> str:
    return secrets.token_hex(16)


def decode_value(raw: object) -> Value:
    if raw == "UNKNOWN":
        return UNKNOWN
    if isinstance(raw, list):
        return tuple(raw)
    return raw


class SessionStore:
    """Filesystem store: one ``<id>.jsonl`` per session under ``root``."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._next_seq: dict[str, int] = {}

    def _path(self, session_id: str) -> Path:
        return self.root / f"{session_id}.jsonl"

    def session_ids(self) -> list[str]:
        return sorted(path.stem for path in self.root.glob("*.jsonl"))

    def append(self, session_id: str, kind: str, payload: dict) -> SessionEvent:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        with self._lock:
            seq = self._next_seq.get(session_id, 1)
            self._next_seq[session_id] = seq + 1
        event = SessionEvent(seq, kind, payload,
                             datetime.now(timezone.utc).isoformat())
        line = json.dumps({"seq": event.seq, "kind": event.kind,
                           "payload": event.payload, "ts": event.timestamp})
        with open(self._path(session_id), "a", encoding="utf-8") as handle:
            handle.write(line + "\n")
            handle.flush()
        return event

    def read(self, session_id: str) -> list[SessionEvent]:
        """Load and check a log; raises CorruptSessionLog on real damage."""
        path = self._path(session_id)
        try:
            raw = path.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise CorruptSessionLog(session_id, "log file missing") from None
        if raw and not raw.endswith("\n"):
            # Interrupted final write: the partial line never happened.
            raw = raw[:raw.rfind("\n") + 1] if "\n" in raw else ""
        events = []
        for lineno, line in enumerate(raw.splitlines(), 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                event = SessionEvent(record["seq"], record["kind"],
                                     record["payload"], record["ts"])
            except (json.JSONDecodeError, KeyError, TypeError):
                raise CorruptSessionLog(session_id, f"malformed line {lineno}") from None
            if event.kind not in EVENT_KINDS:
                raise CorruptSessionLog(session_id, f"unknown event kind on line {lineno}")
            if event.seq != len(events) + 1:
                raise CorruptSessionLog(
                    session_id, f"event seq {event.seq} on line {lineno}, "
                                f"expected {len(events) + 1}")
            events.append(event)
        with self._lock:
            self._next_seq[session_id] = len(events) + 1
        return events

    def quarantine(self, session_id: str) -> Path:
        """Move a damaged log aside so the service can keep starting."""
        path = self._path(session_id)
        target = path.with_suffix(".corrupt")
        counter = 0
        while target.exists():
            counter += 1
            target = path.with_suffix(f".corrupt{counter}")
        path.rename(target)
        with self._lock:
            self._next_seq.pop(session_id, None)
        return target


def replay(session_id: str, events: list[SessionEvent],
           kbs: Mapping[str, KnowledgeBase]) -> tuple[str, Session]:
    """Reconstruct a session from its event log.

    Replayed answers inside a Revised re-run are skipped here: the engine
    re-derives them from the revision itself.
    """
    if not events or events[0].kind != "Started":
        raise CorruptSessionLog(session_id, "log does not begin with Started")
    kb_name = events[0].payload.get("kb")
    goals = events[0].payload.get("goals")
    if kb_name not in kbs:
        raise CorruptSessionLog(session_id, f"unknown knowledge base {kb_name!r}")
    session = start_session(kbs[kb_name], tuple(goals) if goals else None)
    for event in events[1:]:
        if event.kind == "Answered" and not event.payload.get("replayed"):
            question_id = event.payload["question_id"]
            pending = session.pending_question
            if pending is None or pending.id != question_id:
                raise CorruptSessionLog(
                    session_id, f"answer to question {question_id} does not match "
                                f"the replayed consultation flow")
            session.answer(question_id, decode_value(event.payload["value"]))
        elif event.kind == "Revised":
            session = revise_answer(session, event.payload["question_id"],
                                    decode_value(event.payload["value"]))
    return kb_name, session
