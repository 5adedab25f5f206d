"""Rule-based consultation shell with certainty factors, plus deterministic
asset-valuation calculators.

The package splits into the knowledge model (`model`, `parser`), the
consultation engine (`certainty`, `engine`, `explain`), the valuation
calculators (`valuation`), and the delivery surface (`store`, `service`,
`report`, `cli`) with a shipped corpus under `kbs`.
"""

from .certainty import CertaintyValue, combine_confidences
from .engine import (
    Question,
    Session,
    UNKNOWN,
    evaluate_expression,
    start_session,
)
from .explain import explain_expression, explain_rule, revise_answer, why
from .model import (
    CertaintyMode,
    Choice,
    KnowledgeBase,
    ModeKind,
    Qualifier,
    Rule,
    Variable,
    validate,
)
from .parser import parse_expression, parse_kb, serialize_kb

__version__ = "0.1.0"

__all__ = [
    "CertaintyMode",
    "CertaintyValue",
    "Choice",
    "KnowledgeBase",
    "ModeKind",
    "Qualifier",
    "Question",
    "Rule",
    "Session",
    "UNKNOWN",
    "Variable",
    "combine_confidences",
    "evaluate_expression",
    "explain_expression",
    "explain_rule",
    "parse_expression",
    "parse_kb",
    "revise_answer",
    "serialize_kb",
    "start_session",
    "validate",
    "why",
    "__version__",
]
