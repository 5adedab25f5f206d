"""Backward-chaining consultation engine.

A Session drives one consultation: goals are resolved depth-first over
the rules able to conclude them, premise subjects are proven through
other rules before the user is ever asked, and choice contributions are
merged by the knowledge base's certainty regime.  The whole run lives in
one generator, so a session suspends exactly at each question and
resumes when the answer arrives.

Unknown subjects resolve in three steps: an existing fact wins, then
rules concluding the subject are tried in authored order, then the user
is asked.  A support path that loops back onto a rule already being
evaluated is abandoned (recorded as CycleDetected) and the subject whose
candidate rule uncovered the loop falls through to its next support or
to a question.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Generator, Iterable, Mapping

from .certainty import CertaintyValue, combine_confidences, meets_display_floor
from .model import (
    BinaryOp,
    ChoiceAssign,
    Condition,
    Expression,
    KnowledgeBase,
    Negate,
    NumberLit,
    QualifierAssign,
    QualifierTest,
    Rule,
    TextLit,
    ValueKind,
    VarRef,
    Severity,
    condition_subjects,
    rules_concluding_choice,
    rules_concluding_subject,
    validate,
)


class _UnknownType:
    """Distinguished 'no value' answer; also the unresolved expression result."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "UNKNOWN"


UNKNOWN = _UnknownType()

#: A recorded answer or expression result.
Value = object  # float | str | tuple[str, ...] | _UnknownType


class ConsultationError(Exception):
    pass


class InvalidKnowledgeBase(ConsultationError):
    def __init__(self, diagnostics):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))


class UnknownGoal(ConsultationError):
    pass


class StaleQuestion(ConsultationError):
    pass


class IllegalValue(ConsultationError):
    pass


class NotFinished(ConsultationError):
    pass


class _CycleAbandoned(Exception):
    def __init__(self, subject: str, rule: str):
        self.subject = subject
        self.rule = rule


# --- provenance ------------------------------------------------------------

@dataclass(frozen=True)
class UserAnswer:
    question_id: int


@dataclass(frozen=True)
class RuleConclusion:
    rule: str


class _UnresolvedType:
    __slots__ = ()

    def __repr__(self) -> str:
        return "Unresolved"


UNRESOLVED = _UnresolvedType()

Origin = object  # UserAnswer | RuleConclusion | _UnresolvedType


@dataclass(frozen=True)
class Fact:
    subject: str
    value: Value
    origin: Origin


@dataclass
class ConditionReport:
    condition: Condition
    status: object = UNKNOWN  # True | False | UNKNOWN
    origin: Origin = UNRESOLVED


@dataclass
class RuleReport:
    """Per-rule evaluation record: outcome plus one entry per premise condition."""

    rule: str
    outcome: str = "Pending"  # THEN | ELSE | Pending
    condition_reports: list[ConditionReport] = field(default_factory=list)


@dataclass(frozen=True)
class Question:
    id: int
    subject: str
    prompt: str
    options: tuple[str, ...] | None  # labels for a qualifier, None for a variable
    value_kind: ValueKind | None
    multi: bool = False


@dataclass
class ChoiceScore:
    choice: str
    contributions: list[tuple[str, float]]
    combined: CertaintyValue


@dataclass(frozen=True)
class TraceEvent:
    kind: str
    data: dict


AWAITING = "AwaitingAnswer"
FINISHED = "Finished"


# --- answer validation -----------------------------------------------------

def validate_answer(kb: KnowledgeBase, subject: str, value: Value) -> Value:
    """Normalize and legality-check one answer; UNKNOWN always passes."""
    if value is UNKNOWN:
        return UNKNOWN
    qual = kb.qualifiers.get(subject)
    if qual is not None:
        if isinstance(value, str):
            labels: Iterable[str] = (value,)
        elif isinstance(value, (list, tuple, set, frozenset)):
            labels = tuple(value)
        else:
            raise IllegalValue(f"qualifier '{subject}' takes value labels, got {value!r}")
        chosen = []
        for label in labels:
            if label not in qual.values:
                raise IllegalValue(f"'{label}' is not a value of qualifier '{subject}'")
            if label not in chosen:
                chosen.append(label)
        if not chosen:
            raise IllegalValue(f"empty answer for qualifier '{subject}'")
        if not qual.multi_select and len(chosen) > 1:
            raise IllegalValue(f"qualifier '{subject}' takes exactly one value")
        # Declaration order keeps multi-select answers canonical.
        return tuple(label for label in qual.values if label in chosen)
    var = kb.variables.get(subject)
    if var is None:
        raise IllegalValue(f"'{subject}' is not a qualifier or variable")
    if var.value_kind is ValueKind.TEXT:
        if not isinstance(value, str):
            raise IllegalValue(f"variable '{subject}' takes text, got {value!r}")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise IllegalValue(f"variable '{subject}' takes a number, got {value!r}")
    try:
        number = float(value)
    except ValueError:
        raise IllegalValue(f"variable '{subject}' takes a number, got {value!r}") from None
    if not math.isfinite(number):
        raise IllegalValue(f"variable '{subject}' takes a finite number")
    return number


# --- expression evaluation -------------------------------------------------

class DivisionByZero(Exception):
    pass


def _eval_raw(expr: Expression, facts: Mapping[str, Value]) -> Value:
    if isinstance(expr, NumberLit):
        return expr.value
    if isinstance(expr, TextLit):
        return expr.value
    if isinstance(expr, VarRef):
        value = facts.get(expr.name, UNKNOWN)
        return value
    if isinstance(expr, Negate):
        operand = _eval_raw(expr.operand, facts)
        return UNKNOWN if operand is UNKNOWN else -operand
    assert isinstance(expr, BinaryOp)
    left = _eval_raw(expr.left, facts)
    right = _eval_raw(expr.right, facts)
    if left is UNKNOWN or right is UNKNOWN:
        return UNKNOWN
    if expr.op == "+":
        return left + right
    if expr.op == "-":
        return left - right
    if expr.op == "*":
        return left * right
    if right == 0:
        raise DivisionByZero
    return left / right


def evaluate_expression(expr: Expression, facts: Mapping[str, Value]) -> Value:
    """Evaluate against known facts; any unresolved variable gives UNKNOWN.

    Division by zero also gives UNKNOWN: a consultation must not abort on
    degenerate arithmetic (the engine additionally traces the event).
    """
    try:
        return _eval_raw(expr, facts)
    except DivisionByZero:
        return UNKNOWN


def _compare(op: str, left: Value, right: Value) -> bool:
    if isinstance(left, str) or isinstance(right, str):
        return (left == right) if op == "=" else (left != right)
    if op == "=":
        return math.isclose(left, right, rel_tol=1e-9)
    if op == "<>":
        return not math.isclose(left, right, rel_tol=1e-9)
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    return left >= right


# --- the session -----------------------------------------------------------

class Session:
    """One consultation over an immutable knowledge base.

    Single-writer: callers must not mutate one session from two threads
    at once.  Distinct sessions never share state.
    """

    def __init__(
        self,
        kb: KnowledgeBase,
        goals: tuple[str, ...],
        requested_goals: tuple[str, ...] | None,
        scripted: list[tuple[str, Value]] | None = None,
        next_question_id: int = 1,
        history: list[list[TraceEvent]] | None = None,
    ):
        self.kb = kb
        self.goals = goals
        self.requested_goals = requested_goals
        self.facts: dict[str, Fact] = {}
        self.scores: dict[str, ChoiceScore] = {}
        self.fired: dict[str, str] = {}
        self.trace: list[TraceEvent] = []
        self.history: list[list[TraceEvent]] = history or []
        self.rule_reports: dict[str, RuleReport] = {}
        self.status = AWAITING
        self.pending_question: Question | None = None
        self.answers_by_qid: dict[int, tuple[str, Value]] = {}
        self._stack: list[RuleReport] = []
        self._in_progress: set[str] = set()
        self._scripted = list(scripted or [])
        self._next_qid = next_question_id
        self._gen = self._consult()
        self._advance(None)

    # -- driver ------------------------------------------------------------

    def _advance(self, sent: Value | None) -> None:
        try:
            self.pending_question = self._gen.send(sent)
            self.status = AWAITING
        except StopIteration:
            self.pending_question = None
            self.status = FINISHED

    def answer(self, question_id: int, value: Value) -> "Session":
        if self.status != AWAITING or self.pending_question is None:
            raise StaleQuestion("no question is pending")
        if question_id != self.pending_question.id:
            raise StaleQuestion(
                f"question {question_id} is not pending "
                f"(current is {self.pending_question.id})"
            )
        normalized = validate_answer(self.kb, self.pending_question.subject, value)
        self._advance(normalized)
        return self

    def solutions(self) -> list[tuple[str, str, CertaintyValue]]:
        """Scored choices above the display floor, best first."""
        if self.status != FINISHED:
            raise NotFinished("consultation still awaiting answers")
        ranked = []
        for index, (name, choice) in enumerate(self.kb.choices.items()):
            score = self.scores.get(name)
            if score is None or not score.contributions:
                continue
            if not meets_display_floor(self.kb.mode, score.combined.value):
                continue
            ranked.append((index, name, choice.statement, score.combined))
        ranked.sort(key=lambda item: (-item[3].value, item[0]))
        return [(name, statement, combined) for _, name, statement, combined in ranked]

    # -- trace plumbing ----------------------------------------------------

    def _emit(self, kind: str, **data) -> None:
        self.trace.append(TraceEvent(kind, data))

    # -- consultation ------------------------------------------------------

    def _consult(self) -> Generator[Question, Value, None]:
        self._emit("Started", kb=self.kb.title or "untitled", goals=list(self.goals))
        for goal in self.goals:
            yield from self._resolve_choice(goal)
        self._emit("Finished")

    def _resolve_choice(self, choice: str) -> Generator[Question, Value, None]:
        for rule in rules_concluding_choice(self.kb, choice):
            if rule.name in self.fired:
                continue
            try:
                yield from self._evaluate_rule(rule)
            except _CycleAbandoned as cycle:
                self._emit("CycleDetected", subject=cycle.subject, rule=cycle.rule)

    def _prove_subject(self, subject: str) -> Generator[Question, Value, None]:
        """Establish a fact for a qualifier or variable, inferring before asking."""
        if subject in self.facts:
            return
        for rule in rules_concluding_subject(self.kb, subject):
            if rule.name in self.fired:
                continue
            if rule.name in self._in_progress:
                # This support path loops back onto a rule currently being
                # evaluated; abandon it at the caller proving level.
                raise _CycleAbandoned(subject, rule.name)
            try:
                yield from self._evaluate_rule(rule)
            except _CycleAbandoned as cycle:
                self._emit("CycleDetected", subject=cycle.subject, rule=cycle.rule)
                continue
            if subject in self.facts:
                return
        yield from self._ask_subject(subject)

    def _ask_subject(self, subject: str) -> Generator[Question, Value, None]:
        qual = self.kb.qualifiers.get(subject)
        var = self.kb.variables.get(subject)
        qid = self._next_qid
        self._next_qid += 1
        if qual is not None:
            question = Question(qid, subject, qual.prompt, qual.values,
                                None, multi=qual.multi_select)
        else:
            assert var is not None, f"unprovable subject '{subject}'"
            prompt = f"Please input a value for the variable [{var.name}]"
            if var.description:
                prompt += f" ({var.description})"
            question = Question(qid, subject, prompt, None, var.value_kind)

        replayed_value = self._take_scripted(subject)
        if replayed_value is not None:
            self._emit("QuestionAsked", question_id=qid, subject=subject, replayed=True)
            value = replayed_value[0]
            self._emit("Answered", question_id=qid, subject=subject,
                       value=_plain_value(value), replayed=True)
        else:
            self._emit("QuestionAsked", question_id=qid, subject=subject, replayed=False)
            value = yield question
            self._emit("Answered", question_id=qid, subject=subject,
                       value=_plain_value(value), replayed=False)
        self.facts[subject] = Fact(subject, value, UserAnswer(qid))
        self.answers_by_qid[qid] = (subject, value)

    def _take_scripted(self, subject: str) -> tuple[Value] | None:
        for i, (scripted_subject, value) in enumerate(self._scripted):
            if scripted_subject == subject:
                del self._scripted[i]
                return (value,)
        return None

    def _evaluate_rule(self, rule: Rule) -> Generator[Question, Value, None]:
        report = RuleReport(rule.name, "Pending",
                            [ConditionReport(cond) for cond in rule.premise])
        self.rule_reports[rule.name] = report
        self._stack.append(report)
        self._in_progress.add(rule.name)
        try:
            any_false = False
            any_unknown = False
            for creport in report.condition_reports:
                status = yield from self._eval_condition(creport)
                if status is False:
                    any_false = True
                    break  # nothing later can stop the ELSE branch
                if status is UNKNOWN:
                    any_unknown = True
        finally:
            self._in_progress.discard(rule.name)
            self._stack.pop()

        if any_false:
            report.outcome = "ELSE"
            self.fired[rule.name] = "ELSE"
            self._emit("RuleFired", rule=rule.name, outcome="ELSE")
            self._assert_conclusions(rule, rule.else_part)
        elif not any_unknown:
            report.outcome = "THEN"
            self.fired[rule.name] = "THEN"
            self._emit("RuleFired", rule=rule.name, outcome="THEN")
            self._assert_conclusions(rule, rule.then_part)
        # An unknown-but-not-false premise leaves the rule unfired: the
        # outcome stays Pending and other support for the goal is tried.

    def _eval_condition(self, creport: ConditionReport) -> Generator[Question, Value, bool]:
        cond = creport.condition
        for subject in condition_subjects(cond):
            if subject not in self.facts:
                yield from self._prove_subject(subject)
        creport.origin = self._condition_origin(cond)

        if isinstance(cond, QualifierTest):
            fact = self.facts[cond.qualifier]
            if fact.value is UNKNOWN:
                creport.status = False  # a declared unknown is definitively no
                return False
            overlap = bool(set(fact.value) & set(cond.labels))
            creport.status = overlap != cond.negated
            return creport.status

        try:
            left = _eval_raw(cond.left, self._fact_values())
            right = _eval_raw(cond.right, self._fact_values())
        except DivisionByZero:
            self._emit("Note", text=f"division by zero while testing "
                                    f"'{_condition_text(cond)}'")
            creport.status = UNKNOWN
            return UNKNOWN
        if left is UNKNOWN or right is UNKNOWN:
            has_unknown_answer = any(
                self.facts[s].value is UNKNOWN
                for s in condition_subjects(cond) if s in self.facts
            )
            # Unknown by user declaration is definitive; every subject was
            # proven or asked above, so this cannot be a cycle leftover.
            creport.status = False if has_unknown_answer else UNKNOWN
            return creport.status
        creport.status = _compare(cond.op, left, right)
        return creport.status

    def _condition_origin(self, cond: Condition) -> Origin:
        subjects = condition_subjects(cond)
        if not subjects:
            return UNRESOLVED
        first = self.facts.get(subjects[0])
        if first is None or any(s not in self.facts for s in subjects):
            return UNRESOLVED
        return first.origin

    def _fact_values(self) -> dict[str, Value]:
        return {name: fact.value for name, fact in self.facts.items()}

    def _assert_conclusions(self, rule: Rule, conclusions) -> None:
        for concl in conclusions:
            if isinstance(concl, ChoiceAssign):
                score = self.scores.get(concl.choice)
                if score is None:
                    score = ChoiceScore(concl.choice, [],
                                        combine_confidences(self.kb.mode, []))
                    self.scores[concl.choice] = score
                score.contributions.append((rule.name, concl.confidence))
                score.combined = combine_confidences(
                    self.kb.mode, [c for _, c in score.contributions])
                self._emit("ScoreUpdated", choice=concl.choice,
                           value=score.combined.value, locked=score.combined.locked)
            elif isinstance(concl, QualifierAssign):
                if concl.qualifier in self.facts:
                    self._emit("Note", text=f"rule {rule.name} re-concludes "
                                            f"'{concl.qualifier}'; first value kept")
                    continue
                labels = tuple(
                    label for label in self.kb.qualifiers[concl.qualifier].values
                    if label in concl.labels
                )
                self.facts[concl.qualifier] = Fact(
                    concl.qualifier, labels, RuleConclusion(rule.name))
            else:
                if concl.variable in self.facts:
                    self._emit("Note", text=f"rule {rule.name} re-concludes "
                                            f"'[{concl.variable}]'; first value kept")
                    continue
                try:
                    value = _eval_raw(concl.expression, self._fact_values())
                except DivisionByZero:
                    self._emit("Note", text=f"division by zero in rule {rule.name} "
                                            f"assigning [{concl.variable}]; skipped")
                    continue
                if value is UNKNOWN:
                    self._emit("Note", text=f"rule {rule.name} cannot resolve "
                                            f"[{concl.variable}]; skipped")
                    continue
                self.facts[concl.variable] = Fact(
                    concl.variable, value, RuleConclusion(rule.name))


def _plain_value(value: Value) -> object:
    if value is UNKNOWN:
        return "UNKNOWN"
    if isinstance(value, tuple):
        return list(value)
    return value


def _condition_text(cond: Condition) -> str:
    from .parser import condition_to_text

    return condition_to_text(cond)


def start_session(
    kb: KnowledgeBase,
    goals: Iterable[str] | None = None,
    *,
    scripted: list[tuple[str, Value]] | None = None,
    next_question_id: int = 1,
    history: list[list[TraceEvent]] | None = None,
) -> Session:
    """Begin a consultation; chaining runs until the first question or the end.

    ``goals`` defaults to the knowledge base's goal list.  ``scripted``,
    ``next_question_id`` and ``history`` are replay plumbing used by
    answer revision and by session persistence.
    """
    errors = [d for d in validate(kb) if d.severity is Severity.ERROR]
    if errors:
        raise InvalidKnowledgeBase(errors)
    requested = tuple(goals) if goals is not None else None
    if requested is not None:
        for goal in requested:
            if goal not in kb.choices:
                raise UnknownGoal(f"'{goal}' is not a declared choice")
    resolved = requested if requested is not None else kb.goals
    return Session(kb, resolved, requested, scripted=scripted,
                   next_question_id=next_question_id, history=history)
