"""Knowledge representation model for the consultation shell.

A knowledge base is a bundle of qualifiers (list-valued questions),
variables (numeric or text inputs), choices (the recommendations the
engine scores and ranks) and production rules.  Rules carry up to six
components: a premise (IF), a main conclusion list (THEN), an optional
alternative conclusion list (ELSE), an optional NOTE and REFERENCE, and
a NAME.  Everything here is plain data; parsing lives in ``parser`` and
execution in ``engine``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class ModeKind(Enum):
    """The certainty scale a knowledge base works in.

    The left end of each bounded scale means absolute uncertainty, the
    right end absolute certainty.
    """

    YES_NO = "YES/NO"
    SCALE_0_10 = "0-10"
    SCALE_NEG100_POS100 = "-100/+100"
    INCR_DECR = "INCR/DECR"
    CUSTOM_FORMULA = "CUSTOM"
    FUZZY = "FUZZY"


#: Legal confidence interval per mode, or None when unbounded.
CONFIDENCE_RANGE: dict[ModeKind, tuple[float, float] | None] = {
    ModeKind.YES_NO: (0.0, 1.0),
    ModeKind.SCALE_0_10: (0.0, 10.0),
    ModeKind.SCALE_NEG100_POS100: (-100.0, 100.0),
    ModeKind.INCR_DECR: None,
    ModeKind.CUSTOM_FORMULA: None,
    ModeKind.FUZZY: (0.0, 1.0),
}


@dataclass(frozen=True)
class CertaintyMode:
    kind: ModeKind
    formula: str | None = None  # CUSTOM_FORMULA only, over PREV and NEW


class ValueKind(Enum):
    NUMERIC = "NUMERIC"
    TEXT = "TEXT"


@dataclass(frozen=True)
class Qualifier:
    """A question whose answer is one or more labels from a fixed list."""

    name: str
    prompt: str
    values: tuple[str, ...]
    multi_select: bool = False


@dataclass(frozen=True)
class Variable:
    """A named numeric or text input, referenced as ``[name]`` in expressions."""

    name: str
    description: str
    value_kind: ValueKind = ValueKind.NUMERIC


@dataclass(frozen=True)
class Choice:
    """A goal the engine can recommend, with its recommendation sentence."""

    name: str
    statement: str


# --- expressions -----------------------------------------------------------

@dataclass(frozen=True)
class NumberLit:
    value: float


@dataclass(frozen=True)
class TextLit:
    value: str


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class Negate:
    operand: "Expression"


@dataclass(frozen=True)
class BinaryOp:
    op: str  # one of + - * /
    left: "Expression"
    right: "Expression"


Expression = NumberLit | TextLit | VarRef | Negate | BinaryOp


def expression_variables(expr: Expression) -> list[str]:
    """Variable names referenced by ``expr``, first occurrence order, deduplicated."""
    out: list[str] = []

    def walk(node: Expression) -> None:
        if isinstance(node, VarRef):
            if node.name not in out:
                out.append(node.name)
        elif isinstance(node, Negate):
            walk(node.operand)
        elif isinstance(node, BinaryOp):
            walk(node.left)
            walk(node.right)

    walk(expr)
    return out


# --- conditions and conclusions -------------------------------------------

COMPARATORS = ("=", "<>", "<", "<=", ">", ">=")
ORDERING_COMPARATORS = ("<", "<=", ">", ">=")


@dataclass(frozen=True)
class QualifierTest:
    """``<qualifier> IS <labels>`` or ``IS-NOT``.

    IS succeeds when the answered label set intersects the tested set;
    IS-NOT succeeds when the intersection is empty.
    """

    qualifier: str
    labels: tuple[str, ...]
    negated: bool = False


@dataclass(frozen=True)
class Comparison:
    left: Expression
    op: str  # one of COMPARATORS
    right: Expression


Condition = QualifierTest | Comparison


@dataclass(frozen=True)
class ChoiceAssign:
    choice: str
    confidence: float


@dataclass(frozen=True)
class QualifierAssign:
    qualifier: str
    labels: tuple[str, ...]


@dataclass(frozen=True)
class VariableAssign:
    variable: str
    expression: Expression


Conclusion = ChoiceAssign | QualifierAssign | VariableAssign


@dataclass(frozen=True)
class Rule:
    """One production rule.

    ``else_part`` fires when the premise contains a definitively false
    condition; it is empty when the rule has no ELSE.  Rules left unnamed
    in source are named ``R<ordinal>`` by position at parse time, so every
    rule here carries a concrete name.
    """

    name: str
    premise: tuple[Condition, ...]
    then_part: tuple[Conclusion, ...]
    else_part: tuple[Conclusion, ...] = ()
    note: str | None = None
    reference: str | None = None

    def conclusions(self) -> tuple[Conclusion, ...]:
        return self.then_part + self.else_part


@dataclass
class KnowledgeBase:
    """Parsed, immutable-by-convention container of the knowledge pieces.

    Rule order is authored order and is significant: the engine tries
    rules in exactly this order.  ``goals`` defaults to every choice in
    declaration order.
    """

    title: str
    mode: CertaintyMode
    qualifiers: dict[str, Qualifier] = field(default_factory=dict)
    variables: dict[str, Variable] = field(default_factory=dict)
    choices: dict[str, Choice] = field(default_factory=dict)
    rules: tuple[Rule, ...] = ()
    goals: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.goals:
            self.goals = tuple(self.choices)


def rules_concluding_choice(kb: KnowledgeBase, choice: str) -> list[Rule]:
    """Rules whose THEN or ELSE assigns a confidence to ``choice``, in KB order."""
    return [
        rule
        for rule in kb.rules
        if any(isinstance(c, ChoiceAssign) and c.choice == choice for c in rule.conclusions())
    ]


def rules_concluding_subject(kb: KnowledgeBase, subject: str) -> list[Rule]:
    """Rules whose THEN or ELSE can establish qualifier or variable ``subject``."""
    out = []
    for rule in kb.rules:
        for concl in rule.conclusions():
            if isinstance(concl, QualifierAssign) and concl.qualifier == subject:
                out.append(rule)
                break
            if isinstance(concl, VariableAssign) and concl.variable == subject:
                out.append(rule)
                break
    return out


def condition_subjects(cond: Condition) -> list[str]:
    """Qualifier or variable names a condition depends on, in reading order."""
    if isinstance(cond, QualifierTest):
        return [cond.qualifier]
    subjects = expression_variables(cond.left)
    for name in expression_variables(cond.right):
        if name not in subjects:
            subjects.append(name)
    return subjects


def premise_subjects(rule: Rule) -> list[str]:
    subjects: list[str] = []
    for cond in rule.premise:
        for name in condition_subjects(cond):
            if name not in subjects:
                subjects.append(name)
    return subjects


# --- static validation -----------------------------------------------------

class DiagnosticKind(Enum):
    DANGLING_REF = "DanglingRef"
    UNKNOWN_LABEL = "UnknownLabel"
    DUPLICATE_NAME = "DuplicateName"
    DUPLICATE_LABEL = "DuplicateLabel"
    CONFIDENCE_OUT_OF_RANGE = "ConfidenceOutOfRange"
    EMPTY_TEXT = "EmptyText"
    TEXT_MISUSE = "TextMisuse"
    BAD_FORMULA = "BadFormula"
    CONCLUSION_ONLY_VARIABLE = "ConclusionOnlyVariable"
    CIRCULAR_SUPPORT = "CircularSupport"


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


#: Kinds that do not block a consultation (the engine has runtime fallbacks).
WARNING_KINDS = frozenset({
    DiagnosticKind.CONCLUSION_ONLY_VARIABLE,
    DiagnosticKind.CIRCULAR_SUPPORT,
})


@dataclass(frozen=True)
class Diagnostic:
    kind: DiagnosticKind
    message: str
    rule: str | None = None
    subject: str | None = None

    @property
    def severity(self) -> Severity:
        return Severity.WARNING if self.kind in WARNING_KINDS else Severity.ERROR

    def __str__(self) -> str:
        where = f" (rule {self.rule})" if self.rule else ""
        return f"[{self.kind.value}] {self.message}{where}"


def validate(kb: KnowledgeBase) -> list[Diagnostic]:
    """Run every static check and return all violations found.

    A knowledge base with an empty result is guaranteed to run a
    consultation without any runtime name-resolution failure: every
    reference the engine resolves is checked here.  Warning-severity
    diagnostics (circular support, conclusion-only variables) flag
    knowledge that cannot behave as the author probably intended but
    will not crash a session.
    """
    diags: list[Diagnostic] = []

    # Global name uniqueness across all knowledge pieces.  Same-category
    # duplicates cannot be represented (name-keyed maps) and are rejected
    # at parse time; cross-category clashes and rule names land here.
    seen: dict[str, str] = {}
    for category, names in (
        ("qualifier", kb.qualifiers),
        ("variable", kb.variables),
        ("choice", kb.choices),
    ):
        for name in names:
            if name in seen:
                diags.append(Diagnostic(
                    DiagnosticKind.DUPLICATE_NAME,
                    f"name '{name}' declared as both {seen[name]} and {category}",
                    subject=name,
                ))
            else:
                seen[name] = category
    for rule in kb.rules:
        if rule.name in seen:
            diags.append(Diagnostic(
                DiagnosticKind.DUPLICATE_NAME,
                f"rule name '{rule.name}' collides with a {seen[rule.name]} or earlier rule",
                rule=rule.name,
            ))
        else:
            seen[rule.name] = "rule"

    for qual in kb.qualifiers.values():
        if not qual.prompt.strip():
            diags.append(Diagnostic(
                DiagnosticKind.EMPTY_TEXT, f"qualifier '{qual.name}' has an empty prompt",
                subject=qual.name,
            ))
        dupes = {v for v in qual.values if qual.values.count(v) > 1}
        for label in sorted(dupes):
            diags.append(Diagnostic(
                DiagnosticKind.DUPLICATE_LABEL,
                f"qualifier '{qual.name}' repeats value '{label}'",
                subject=qual.name,
            ))
    for choice in kb.choices.values():
        if not choice.statement.strip():
            diags.append(Diagnostic(
                DiagnosticKind.EMPTY_TEXT, f"choice '{choice.name}' has an empty statement",
                subject=choice.name,
            ))

    diags.extend(_check_mode(kb))

    for goal in kb.goals:
        if goal not in kb.choices:
            diags.append(Diagnostic(
                DiagnosticKind.DANGLING_REF, f"goal '{goal}' is not a declared choice",
                subject=goal,
            ))

    for rule in kb.rules:
        diags.extend(_check_rule(kb, rule))

    diags.extend(_check_conclusion_only_variables(kb))
    diags.extend(_check_circular_support(kb))
    return diags


def _check_mode(kb: KnowledgeBase) -> list[Diagnostic]:
    if kb.mode.kind is not ModeKind.CUSTOM_FORMULA:
        return []
    formula = kb.mode.formula or ""
    if not formula.strip():
        return [Diagnostic(DiagnosticKind.BAD_FORMULA, "custom mode requires a non-empty formula")]
    from .parser import KbSyntaxError, parse_formula  # deferred: parser imports this module

    try:
        ast = parse_formula(formula)
    except KbSyntaxError as exc:
        return [Diagnostic(
            DiagnosticKind.BAD_FORMULA, f"custom formula does not parse: {exc.errors[0].message}",
        )]
    bad = [name for name in expression_variables(ast) if name not in ("PREV", "NEW")]
    if bad:
        return [Diagnostic(
            DiagnosticKind.BAD_FORMULA,
            f"custom formula may reference only PREV and NEW, found {', '.join(bad)}",
        )]
    return []


def _expr_type(kb: KnowledgeBase, expr: Expression) -> str:
    """'text', 'numeric', or 'mixed' (text data inside arithmetic)."""
    if isinstance(expr, TextLit):
        return "text"
    if isinstance(expr, NumberLit):
        return "numeric"
    if isinstance(expr, VarRef):
        var = kb.variables.get(expr.name)
        if var is not None and var.value_kind is ValueKind.TEXT:
            return "text"
        return "numeric"
    if isinstance(expr, Negate):
        return "numeric" if _expr_type(kb, expr.operand) == "numeric" else "mixed"
    left, right = _expr_type(kb, expr.left), _expr_type(kb, expr.right)
    return "numeric" if left == right == "numeric" else "mixed"


def _check_expr_refs(kb: KnowledgeBase, rule: Rule, expr: Expression) -> list[Diagnostic]:
    return [
        Diagnostic(
            DiagnosticKind.DANGLING_REF,
            f"expression references undeclared variable '{name}'",
            rule=rule.name, subject=name,
        )
        for name in expression_variables(expr)
        if name not in kb.variables
    ]


def _check_rule(kb: KnowledgeBase, rule: Rule) -> list[Diagnostic]:
    diags: list[Diagnostic] = []

    for cond in rule.premise:
        if isinstance(cond, QualifierTest):
            qual = kb.qualifiers.get(cond.qualifier)
            if qual is None:
                diags.append(Diagnostic(
                    DiagnosticKind.DANGLING_REF,
                    f"premise references undeclared qualifier '{cond.qualifier}'",
                    rule=rule.name, subject=cond.qualifier,
                ))
                continue
            for label in cond.labels:
                if label not in qual.values:
                    diags.append(Diagnostic(
                        DiagnosticKind.UNKNOWN_LABEL,
                        f"qualifier '{cond.qualifier}' has no value '{label}'",
                        rule=rule.name, subject=cond.qualifier,
                    ))
        else:
            diags.extend(_check_expr_refs(kb, rule, cond.left))
            diags.extend(_check_expr_refs(kb, rule, cond.right))
            left, right = _expr_type(kb, cond.left), _expr_type(kb, cond.right)
            if "mixed" in (left, right):
                diags.append(Diagnostic(
                    DiagnosticKind.TEXT_MISUSE, "text value used in arithmetic",
                    rule=rule.name,
                ))
            elif cond.op in ORDERING_COMPARATORS and "text" in (left, right):
                diags.append(Diagnostic(
                    DiagnosticKind.TEXT_MISUSE,
                    f"text values only support = and <>, not '{cond.op}'",
                    rule=rule.name,
                ))
            elif left != right:
                diags.append(Diagnostic(
                    DiagnosticKind.TEXT_MISUSE, "comparison mixes text and numeric operands",
                    rule=rule.name,
                ))

    conf_range = CONFIDENCE_RANGE[kb.mode.kind]
    for concl in rule.conclusions():
        if isinstance(concl, ChoiceAssign):
            if concl.choice not in kb.choices:
                diags.append(Diagnostic(
                    DiagnosticKind.DANGLING_REF,
                    f"conclusion references undeclared choice '{concl.choice}'",
                    rule=rule.name, subject=concl.choice,
                ))
            if conf_range is not None:
                lo, hi = conf_range
                legal = lo <= concl.confidence <= hi
                if kb.mode.kind is ModeKind.YES_NO:
                    legal = concl.confidence in (0.0, 1.0)
                if not legal:
                    diags.append(Diagnostic(
                        DiagnosticKind.CONFIDENCE_OUT_OF_RANGE,
                        f"confidence {concl.confidence:g} outside the "
                        f"{kb.mode.kind.value} scale",
                        rule=rule.name, subject=concl.choice,
                    ))
        elif isinstance(concl, QualifierAssign):
            qual = kb.qualifiers.get(concl.qualifier)
            if qual is None:
                diags.append(Diagnostic(
                    DiagnosticKind.DANGLING_REF,
                    f"conclusion references undeclared qualifier '{concl.qualifier}'",
                    rule=rule.name, subject=concl.qualifier,
                ))
            else:
                for label in concl.labels:
                    if label not in qual.values:
                        diags.append(Diagnostic(
                            DiagnosticKind.UNKNOWN_LABEL,
                            f"qualifier '{concl.qualifier}' has no value '{label}'",
                            rule=rule.name, subject=concl.qualifier,
                        ))
        else:
            target = kb.variables.get(concl.variable)
            if target is None:
                diags.append(Diagnostic(
                    DiagnosticKind.DANGLING_REF,
                    f"conclusion assigns undeclared variable '{concl.variable}'",
                    rule=rule.name, subject=concl.variable,
                ))
            diags.extend(_check_expr_refs(kb, rule, concl.expression))
            expr_type = _expr_type(kb, concl.expression)
            if expr_type == "mixed":
                diags.append(Diagnostic(
                    DiagnosticKind.TEXT_MISUSE, "text value used in arithmetic",
                    rule=rule.name,
                ))
            elif target is not None:
                want = "text" if target.value_kind is ValueKind.TEXT else "numeric"
                if expr_type != want:
                    diags.append(Diagnostic(
                        DiagnosticKind.TEXT_MISUSE,
                        f"assignment of a {expr_type} value to {want} variable "
                        f"'{concl.variable}'",
                        rule=rule.name, subject=concl.variable,
                    ))
    return diags


def _check_conclusion_only_variables(kb: KnowledgeBase) -> list[Diagnostic]:
    # A variable read only inside conclusion expressions can never hold a
    # value when those conclusions fire: conclusions do not trigger
    # questions, so unless the variable is asked via some premise or
    # assigned by some rule, every read of it degenerates to Unknown.
    read_in_conclusions: set[str] = set()
    in_premises: set[str] = set()
    assigned: set[str] = set()
    for rule in kb.rules:
        in_premises.update(premise_subjects(rule))
        for concl in rule.conclusions():
            if isinstance(concl, VariableAssign):
                assigned.add(concl.variable)
                read_in_conclusions.update(expression_variables(concl.expression))
    dead = (read_in_conclusions & set(kb.variables)) - in_premises - assigned
    return [
        Diagnostic(
            DiagnosticKind.CONCLUSION_ONLY_VARIABLE,
            f"variable '{name}' is read only in conclusions and can never "
            "receive a value there",
            subject=name,
        )
        for name in sorted(dead)
    ]


def _check_circular_support(kb: KnowledgeBase) -> list[Diagnostic]:
    # Subject dependency graph: s depends on every premise subject of every
    # rule able to conclude s.  A choice or qualifier all of whose
    # concluding rules loop back to it has no acyclic support.
    graph: dict[str, set[str]] = {}
    supported = list(kb.choices) + [
        q for q in kb.qualifiers if rules_concluding_subject(kb, q)
    ]
    for rule in kb.rules:
        deps = set(premise_subjects(rule))
        for concl in rule.conclusions():
            if isinstance(concl, ChoiceAssign):
                graph.setdefault(concl.choice, set()).update(deps)
            elif isinstance(concl, QualifierAssign):
                graph.setdefault(concl.qualifier, set()).update(deps)
            else:
                graph.setdefault(concl.variable, set()).update(deps)

    def reaches(start: str, target: str) -> bool:
        stack, visited = [start], set()
        while stack:
            node = stack.pop()
            if node == target:
                return True
            if node in visited:
                continue
            visited.add(node)
            stack.extend(graph.get(node, ()))
        return False

    diags = []
    for subject in supported:
        concluders = (
            rules_concluding_choice(kb, subject)
            if subject in kb.choices
            else rules_concluding_subject(kb, subject)
        )
        if not concluders:
            continue
        if all(
            any(dep == subject or reaches(dep, subject) for dep in premise_subjects(rule))
            for rule in concluders
        ):
            diags.append(Diagnostic(
                DiagnosticKind.CIRCULAR_SUPPORT,
                f"every support path for '{subject}' returns to itself",
                subject=subject,
            ))
    return diags
