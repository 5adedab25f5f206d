"""Certainty-factor algebra: how rule contributions merge into one score.

The shell supports six working regimes.  On every bounded scale the left
endpoint means absolute uncertainty and the right endpoint absolute
certainty; for the two numeric interval scales those endpoints are
absorbing, so the first endpoint contribution locks the score against
everything that follows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .model import CONFIDENCE_RANGE, CertaintyMode, Expression, ModeKind


class OutOfRange(ValueError):
    """A contribution falls outside the mode's legal interval."""


@dataclass(frozen=True)
class CertaintyValue:
    mode: CertaintyMode
    value: float
    locked: bool = False


_LOCKING = {
    ModeKind.SCALE_0_10: (0.0, 10.0),
    ModeKind.SCALE_NEG100_POS100: (-100.0, 100.0),
}


def check_contribution(mode: CertaintyMode, value: float) -> None:
    bounds = CONFIDENCE_RANGE[mode.kind]
    if bounds is None:
        return
    if mode.kind is ModeKind.YES_NO:
        if value not in (0.0, 1.0):
            raise OutOfRange(f"YES/NO confidence must be 0 or 1, got {value:g}")
        return
    lo, hi = bounds
    if not lo <= value <= hi:
        raise OutOfRange(
            f"confidence {value:g} outside [{lo:g}, {hi:g}] for mode {mode.kind.value}"
        )


@lru_cache(maxsize=64)
def _compiled_formula(formula: str) -> Expression:
    from .parser import parse_formula

    return parse_formula(formula)


def _apply_formula(formula: str, prev: float, new: float) -> float:
    from .model import BinaryOp, Negate, NumberLit, VarRef

    def ev(node: Expression) -> float:
        if isinstance(node, NumberLit):
            return node.value
        if isinstance(node, VarRef):
            return prev if node.name == "PREV" else new
        if isinstance(node, Negate):
            return -ev(node.operand)
        assert isinstance(node, BinaryOp)
        left, right = ev(node.left), ev(node.right)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        # Degenerate formulas must not abort a consultation: x/0 folds to 0.
        return left / right if right != 0.0 else 0.0

    return ev(_compiled_formula(formula))


def combine_confidences(mode: CertaintyMode, contributions: list[float]) -> CertaintyValue:
    """Merge an ordered contribution list into one certainty value.

    YES/NO and FUZZY take the maximum (logical OR shape); the 0-10 and
    -100/+100 scales lock on the first endpoint contribution, otherwise
    take the arithmetic mean; INCR/DECR sums; a custom formula is folded
    left with PREV seeded by the first contribution.
    """
    for value in contributions:
        check_contribution(mode, value)
    if not contributions:
        return CertaintyValue(mode, 0.0)

    kind = mode.kind
    if kind in (ModeKind.YES_NO, ModeKind.FUZZY):
        return CertaintyValue(mode, max(contributions))
    if kind is ModeKind.INCR_DECR:
        return CertaintyValue(mode, math.fsum(contributions))
    if kind is ModeKind.CUSTOM_FORMULA:
        acc = contributions[0]
        for new in contributions[1:]:
            acc = _apply_formula(mode.formula or "PREV", acc, new)
        return CertaintyValue(mode, acc)

    endpoints = _LOCKING[kind]
    for value in contributions:
        if value in endpoints:
            return CertaintyValue(mode, value, locked=True)
    # fsum keeps the mean exact in one rounding, so reordering the
    # contributions can never change the combined value.
    mean = math.fsum(contributions) / len(contributions)
    lo, hi = CONFIDENCE_RANGE[kind]  # type: ignore[misc]
    return CertaintyValue(mode, min(hi, max(lo, mean)))


#: Minimum combined value (exclusive unless noted) for a choice to be listed.
def meets_display_floor(mode: CertaintyMode, value: float) -> bool:
    if mode.kind is ModeKind.SCALE_0_10:
        return value >= 1.0
    return value > 0.0
