"""Explanation facilities: WHY chains, rule provenance, and what-if revision.

``why`` reports the live sub-goal stack behind the pending question, so
the user sees every rule whose premise the engine is currently trying to
satisfy.  ``explain_rule`` answers the follow-up "from where do you know
that?" for each premise condition.  ``revise_answer`` replays the whole
consultation with one answer changed, which keeps revised sessions
consistent without any retraction machinery.
"""

from __future__ import annotations

from dataclasses import dataclass

from .engine import (
    ConditionReport,
    ConsultationError,
    Session,
    TraceEvent,
    UNKNOWN,
    Value,
    start_session,
    validate_answer,
)
from .model import Expression, expression_variables


class NoPendingQuestion(ConsultationError):
    pass


class RuleNotInTrace(ConsultationError):
    pass


class UnknownQuestion(ConsultationError):
    pass


@dataclass(frozen=True)
class ExplanationNode:
    rule: str
    outcome: str  # THEN | ELSE | Pending
    condition_reports: tuple[ConditionReport, ...]


def _node(session: Session, rule_name: str) -> ExplanationNode:
    report = session.rule_reports[rule_name]
    return ExplanationNode(report.rule, report.outcome,
                           tuple(report.condition_reports))


def why(session: Session) -> list[ExplanationNode]:
    """The rules being proven right now, outermost goal first.

    The last node is the rule whose pending condition raised the current
    question.
    """
    if session.pending_question is None:
        raise NoPendingQuestion("no question is pending")
    return [_node(session, report.rule) for report in session._stack]


def explain_rule(session: Session, rule: str) -> ExplanationNode:
    """Condition-by-condition provenance for a rule seen this session."""
    if rule not in session.rule_reports:
        raise RuleNotInTrace(f"rule '{rule}' has not been evaluated in this session")
    return _node(session, rule)


def explain_expression(session: Session, expr: Expression) -> list[tuple[str, Value]]:
    """Each referenced variable with its current session value, or UNKNOWN."""
    out = []
    for name in expression_variables(expr):
        fact = session.facts.get(name)
        out.append((name, UNKNOWN if fact is None else fact.value))
    return out


def revise_answer(session: Session, question_id: int, new_value: Value) -> Session:
    """Re-run the consultation with one prior answer replaced.

    Every other previously given answer is replayed onto its subject when
    the fresh run needs it; answers the new path never needs are dropped.
    The pre-revision trace is archived on the returned session.
    """
    if question_id not in session.answers_by_qid:
        raise UnknownQuestion(f"question {question_id} was never answered")
    subject, _ = session.answers_by_qid[question_id]
    normalized = validate_answer(session.kb, subject, new_value)

    script = []
    for qid in sorted(session.answers_by_qid):
        answered_subject, value = session.answers_by_qid[qid]
        script.append((answered_subject, normalized if qid == question_id else value))

    revised = start_session(
        session.kb,
        session.requested_goals,
        scripted=script,
        next_question_id=session._next_qid,
        history=session.history + [session.trace],
    )
    revised.trace.insert(1, TraceEvent(
        "Revised", {"question_id": question_id, "value": _wire_value(normalized)}))
    return revised


def _wire_value(value: Value) -> object:
    if value is UNKNOWN:
        return "UNKNOWN"
    if isinstance(value, tuple):
        return list(value)
    return value
