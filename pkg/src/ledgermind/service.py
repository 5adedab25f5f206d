"""Consultation service: KB corpus loading, live sessions, wire API.

The service holds every knowledge base immutably in memory, one engine
Session per consultation, and appends events to the session store before
answering any mutating request.  On startup it replays every stored log,
so a restart resumes all consultations where they stopped; logs that
fail replay are quarantined and reported, never fatal.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Any, Mapping

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import kbs as shipped_kbs
from .engine import (
    ConsultationError,
    IllegalValue,
    NotFinished,
    Question,
    Session,
    StaleQuestion,
    UnknownGoal,
)
from .explain import (
    ExplanationNode,
    NoPendingQuestion,
    RuleNotInTrace,
    UnknownQuestion,
    explain_rule,
    revise_answer,
    why,
)
from .engine import start_session
from .model import KnowledgeBase, Severity, validate
from .parser import condition_to_text, parse_kb
from .store import CorruptSessionLog, SessionStore, decode_value, new_session_id, replay

#: Engine trace kinds copied into the persistent log after each request.
AUDIT_KINDS = frozenset({"QuestionAsked", "Answered", "RuleFired",
                         "ScoreUpdated", "Finished"})


class UnknownKb(ConsultationError):
    pass


class UnknownSession(ConsultationError):
    pass


def load_kb_dir(kb_dir: str | Path) -> tuple[dict[str, KnowledgeBase], list[str]]:
    """Parse and validate every ``.kb`` file; skip and report broken ones."""
    kbs: dict[str, KnowledgeBase] = {}
    reports: list[str] = []
    for path in sorted(Path(kb_dir).glob("*.kb")):
        parsed = parse_kb(path.read_text(encoding="utf-8"))
        if isinstance(parsed, list):
            reports.append(f"{path.name}: {len(parsed)} parse error(s), skipped")
            continue
        errors = [d for d in validate(parsed) if d.severity is Severity.ERROR]
        if errors:
            reports.append(f"{path.name}: {len(errors)} validation error(s), skipped")
            continue
        kbs[path.stem] = parsed
    return kbs, reports


def shipped_kb_dir() -> Path:
    return Path(shipped_kbs.__file__).parent


class SessionService:
    """Own the sessions; persist first, respond second; one writer per session."""

    def __init__(self, kbs: Mapping[str, KnowledgeBase],
                 store: SessionStore | None = None):
        if not kbs:
            raise ValueError("no valid knowledge bases to serve")
        self.kbs = dict(kbs)
        self.store = store
        self.sessions: dict[str, Session] = {}
        self.kb_names: dict[str, str] = {}
        self.startup_reports: list[str] = []
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self._persisted: dict[str, int] = {}
        if store is not None:
            self._recover(store)

    @classmethod
    def from_dirs(cls, kb_dir: str | Path | None,
                  store_dir: str | Path | None) -> "SessionService":
        directory = Path(kb_dir) if kb_dir else shipped_kb_dir()
        kbs, reports = load_kb_dir(directory)
        store = SessionStore(store_dir) if store_dir else None
        service = cls(kbs, store)
        service.startup_reports = reports + service.startup_reports
        return service

    def _recover(self, store: SessionStore) -> None:
        for session_id in store.session_ids():
            try:
                events = store.read(session_id)
                kb_name, session = replay(session_id, events, self.kbs)
            except (CorruptSessionLog, ConsultationError) as exc:
                quarantined = store.quarantine(session_id)
                self.startup_reports.append(
                    f"session {session_id} quarantined to {quarantined.name}: {exc}")
                continue
            self.sessions[session_id] = session
            self.kb_names[session_id] = kb_name
            self._locks[session_id] = threading.Lock()
            self._persisted[session_id] = len(session.trace)

    # -- internals ---------------------------------------------------------

    def _lock(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            if session_id not in self.sessions:
                raise UnknownSession(f"no session {session_id}")
            return self._locks[session_id]

    def _persist_delta(self, session_id: str) -> None:
        session = self.sessions[session_id]
        if self.store is None:
            self._persisted[session_id] = len(session.trace)
            return
        start = self._persisted.get(session_id, 0)
        for event in session.trace[start:]:
            if event.kind in AUDIT_KINDS:
                self.store.append(session_id, event.kind, dict(event.data))
        self._persisted[session_id] = len(session.trace)

    # -- operations --------------------------------------------------------

    def create(self, kb_name: str, goals: list[str] | None = None) -> str:
        kb = self.kbs.get(kb_name)
        if kb is None:
            raise UnknownKb(f"no knowledge base named '{kb_name}'")
        session = start_session(kb, goals)
        session_id = new_session_id()
        with self._registry_lock:
            self.sessions[session_id] = session
            self.kb_names[session_id] = kb_name
            self._locks[session_id] = threading.Lock()
            self._persisted[session_id] = 0
        with self._locks[session_id]:
            if self.store is not None:
                self.store.append(session_id, "Started",
                                  {"kb": kb_name, "goals": list(goals) if goals else None})
            self._persist_delta(session_id)
        return session_id

    def get(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise UnknownSession(f"no session {session_id}")
        return session

    def answer(self, session_id: str, question_id: int, value: Any) -> Session:
        with self._lock(session_id):
            session = self.get(session_id)
            session.answer(question_id, decode_value(value))
            self._persist_delta(session_id)
            return session

    def revise(self, session_id: str, question_id: int, value: Any) -> Session:
        with self._lock(session_id):
            session = self.get(session_id)
            revised = revise_answer(session, question_id, decode_value(value))
            if self.store is not None:
                self.store.append(session_id, "Revised", {
                    "question_id": question_id,
                    "value": _jsonable(decode_value(value))})
            self.sessions[session_id] = revised
            self._persisted[session_id] = 0
            self._persist_delta(session_id)
            return revised


# --- wire payload shaping --------------------------------------------------

def _jsonable(value: Any) -> Any:
    from .engine import UNKNOWN

    if value is UNKNOWN:
        return "UNKNOWN"
    if isinstance(value, tuple):
        return list(value)
    return value


def question_payload(question: Question) -> dict:
    return {
        "id": question.id,
        "subject": question.subject,
        "prompt": question.prompt,
        "options": list(question.options) if question.options is not None else None,
        "value_kind": question.value_kind.value if question.value_kind else None,
        "multi": question.multi,
    }


def status_payload(session: Session) -> dict:
    payload: dict = {"status": session.status}
    if session.pending_question is not None:
        payload["question"] = question_payload(session.pending_question)
    else:
        payload["question"] = None
    return payload


def _origin_payload(origin: Any) -> dict:
    from .engine import RuleConclusion, UserAnswer

    if isinstance(origin, UserAnswer):
        return {"kind": "UserAnswer", "question_id": origin.question_id}
    if isinstance(origin, RuleConclusion):
        return {"kind": "RuleConclusion", "rule": origin.rule}
    return {"kind": "Unresolved"}


def _status_text(status: Any) -> str:
    if status is True:
        return "True"
    if status is False:
        return "False"
    return "Unknown"


def node_payload(node: ExplanationNode) -> dict:
    return {
        "rule": node.rule,
        "outcome": node.outcome,
        "conditions": [
            {
                "text": condition_to_text(report.condition),
                "status": _status_text(report.status),
                "origin": _origin_payload(report.origin),
            }
            for report in node.condition_reports
        ],
    }


def solutions_payload(session: Session) -> list[dict]:
    mode = session.kb.mode.kind.value
    return [
        {"choice": choice, "statement": statement,
         "confidence": combined.value, "mode": mode}
        for choice, statement, combined in session.solutions()
    ]


def trace_payload(session: Session) -> list[dict]:
    return [{"kind": event.kind, "data": event.data} for event in session.trace]


# --- HTTP app ---------------------------------------------------------------

class CreateSessionBody(BaseModel):
    goals: list[str] | None = None


class AnswerBody(BaseModel):
    question_id: int
    value: Any


class RevisionBody(BaseModel):
    question_id: int
    value: Any


_NOT_FOUND = (UnknownKb, UnknownSession, RuleNotInTrace)
_CONFLICT = (UnknownGoal, IllegalValue, StaleQuestion, UnknownQuestion,
             NotFinished, NoPendingQuestion)


def create_app(service: SessionService) -> FastAPI:
    app = FastAPI(title="ledgermind consultation service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
    )

    @app.exception_handler(ConsultationError)
    async def _consultation_error(_request, exc: ConsultationError):
        status = 404 if isinstance(exc, _NOT_FOUND) else \
            409 if isinstance(exc, _CONFLICT) else 400
        return JSONResponse({"error": str(exc)}, status_code=status)

    @app.post("/kbs/{kb}/sessions", status_code=201)
    def create_session(kb: str, body: CreateSessionBody | None = None):
        goals = body.goals if body else None
        session_id = service.create(kb, goals)
        return {"session_id": session_id}

    @app.get("/sessions/{session_id}/next")
    def next_question(session_id: str):
        return status_payload(service.get(session_id))

    @app.post("/sessions/{session_id}/answers")
    def post_answer(session_id: str, body: AnswerBody):
        session = service.answer(session_id, body.question_id, body.value)
        return status_payload(session)

    @app.get("/sessions/{session_id}/why")
    def get_why(session_id: str):
        return [node_payload(node) for node in why(service.get(session_id))]

    @app.get("/sessions/{session_id}/rules/{name}")
    def get_rule(session_id: str, name: str):
        return node_payload(explain_rule(service.get(session_id), name))

    @app.post("/sessions/{session_id}/revisions")
    def post_revision(session_id: str, body: RevisionBody):
        session = service.revise(session_id, body.question_id, body.value)
        return status_payload(session)

    @app.get("/sessions/{session_id}/solutions")
    def get_solutions(session_id: str):
        return solutions_payload(service.get(session_id))

    @app.get("/sessions/{session_id}/trace")
    def get_trace(session_id: str):
        return trace_payload(service.get(session_id))

    return app
