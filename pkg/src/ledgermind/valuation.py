"""Deterministic asset-valuation calculators.

All money amounts are exact decimals in currency-agnostic units.
Intermediate arithmetic runs at full precision; results are rounded
half-up to 2 fractional digits exactly once, at each operation boundary,
so every figure is reproducible to the cent.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation, ROUND_HALF_UP
from enum import Enum
from typing import Iterable, NamedTuple

CENT = Decimal("0.01")


class ValuationError(ValueError):
    pass


class NegativeComponent(ValuationError):
    pass


class FractionOutOfRange(ValuationError):
    pass


class OverDepreciated(ValuationError):
    pass


class InsufficientQuantity(ValuationError):
    pass


class PeriodInconsistent(ValuationError):
    pass


def _dec(value, what: str = "amount") -> Decimal:
    if isinstance(value, Decimal):
        return value
    if isinstance(value, int):
        return Decimal(value)
    if isinstance(value, float):
        return Decimal(str(value))
    try:
        return Decimal(value)
    except (InvalidOperation, TypeError):
        raise ValuationError(f"{what} is not a number: {value!r}") from None


def money(value) -> Decimal:
    """Round to 2 fractional digits, half-up."""
    return _dec(value).quantize(CENT, rounding=ROUND_HALF_UP)


def _nonneg(value, what: str) -> Decimal:
    amount = _dec(value, what)
    if amount < 0:
        raise NegativeComponent(f"{what} must be non-negative, got {amount}")
    return amount


@dataclass(frozen=True)
class Lot:
    """One input lot; unit_cost may carry full precision (WAC averages)."""

    seq: int
    quantity: Decimal
    unit_cost: Decimal

    def value(self) -> Decimal:
        return self.quantity * self.unit_cost


@dataclass(frozen=True)
class LotLedger:
    lots: tuple[Lot, ...]

    def __post_init__(self) -> None:
        prev = None
        for lot in self.lots:
            if lot.quantity < 0:
                raise NegativeComponent(f"lot {lot.seq} has negative quantity")
            if prev is not None and lot.seq <= prev:
                raise ValuationError(f"lot seq {lot.seq} not strictly increasing")
            prev = lot.seq

    def total_quantity(self) -> Decimal:
        return sum((lot.quantity for lot in self.lots), Decimal(0))

    def total_value(self) -> Decimal:
        return sum((lot.value() for lot in self.lots), Decimal(0))


def make_ledger(rows: Iterable[tuple]) -> LotLedger:
    """Build a ledger from (seq, quantity, unit_cost) triples."""
    return LotLedger(tuple(
        Lot(int(seq), _dec(qty, f"lot {seq} quantity"), _dec(cost, f"lot {seq} unit cost"))
        for seq, qty, cost in rows
    ))


def read_lot_ledger(path: str) -> LotLedger:
    """Load a ledger from a comma-separated file: header seq,quantity,unit_cost."""
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["seq", "quantity", "unit_cost"]:
            raise ValuationError(
                "lot file must start with header 'seq,quantity,unit_cost'")
        rows = []
        for lineno, row in enumerate(reader, 2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 3:
                raise ValuationError(f"line {lineno}: expected 3 fields, got {len(row)}")
            try:
                rows.append((int(row[0]), row[1].strip(), row[2].strip()))
            except ValueError:
                raise ValuationError(f"line {lineno}: seq must be an integer") from None
    return make_ledger(rows)


class CostingMethod(Enum):
    WAC = "WAC"
    FIFO = "FIFO"
    LIFO = "LIFO"


@dataclass(frozen=True)
class CashFlowSchedule:
    flows: tuple[tuple[int, Decimal], ...]
    rate: Decimal

    def __post_init__(self) -> None:
        if self.rate < 0:
            raise NegativeComponent("discount rate must be non-negative")
        prev = 0
        for period, _ in self.flows:
            if period <= prev:
                raise PeriodInconsistent(
                    f"flow periods must be strictly increasing positive integers, "
                    f"got {period} after {prev}")
            prev = period

    def max_period(self) -> int:
        return self.flows[-1][0] if self.flows else 0


def make_schedule(flows: Iterable[tuple], rate) -> CashFlowSchedule:
    return CashFlowSchedule(
        tuple((int(p), _dec(a, f"flow at period {p}")) for p, a in flows),
        _dec(rate, "rate"),
    )


# --- entry-value compositions ----------------------------------------------

def acquisition_cost(price, irrecoverable_taxes, transport, accessory) -> Decimal:
    """Purchase entry value: price + irrecoverable taxes + transport + accessory.

    The price is assumed net of recoverable VAT; that is the caller's
    contract, not checked here.
    """
    total = (_nonneg(price, "price")
             + _nonneg(irrecoverable_taxes, "irrecoverable taxes")
             + _nonneg(transport, "transport")
             + _nonneg(accessory, "accessory costs"))
    return money(total)


def production_cost(raw_materials, other_direct, indirect_total, allocation_fraction) -> Decimal:
    """Own-production entry value with a rational share of indirect costs.

    Administration, financial and unpacking costs never belong here; the
    caller must not fold them into any component.
    """
    fraction = _dec(allocation_fraction, "allocation fraction")
    if not Decimal(0) <= fraction <= Decimal(1):
        raise FractionOutOfRange(f"allocation fraction must be in [0, 1], got {fraction}")
    total = (_nonneg(raw_materials, "raw materials")
             + _nonneg(other_direct, "other direct costs")
             + _nonneg(indirect_total, "indirect costs") * fraction)
    return money(total)


def net_accounting_value(input_value, depreciations: Iterable) -> Decimal:
    total = _nonneg(input_value, "input value")
    for i, dep in enumerate(depreciations, 1):
        total -= _nonneg(dep, f"depreciation {i}")
    if total < 0:
        raise OverDepreciated("depreciations exceed the input value")
    return money(total)


def net_realizable_value(sell_price, sale_costs) -> Decimal:
    """Sell price minus sale costs; negative results signal a loss-making sale."""
    return money(_nonneg(sell_price, "sell price") - _nonneg(sale_costs, "sale costs"))


class ResidualValue(NamedTuple):
    value: Decimal
    floored: bool


def residual_value(cease_proceeds, cease_costs) -> ResidualValue:
    """Cease proceeds minus cease costs, floored at zero with a flag."""
    net = _nonneg(cease_proceeds, "cease proceeds") - _nonneg(cease_costs, "cease costs")
    if net < 0:
        return ResidualValue(money(0), True)
    return ResidualValue(money(net), False)


# --- discounting -----------------------------------------------------------

def _discounted_sum(schedule: CashFlowSchedule) -> Decimal:
    base = Decimal(1) + schedule.rate
    return sum(
        (amount / base ** period for period, amount in schedule.flows),
        Decimal(0),
    )


def present_value(schedule: CashFlowSchedule) -> Decimal:
    """Sum of amount / (1+rate)^period; rounded once on the final sum."""
    return money(_discounted_sum(schedule))


def use_value(schedule: CashFlowSchedule, end_of_life_period: int, residual) -> Decimal:
    """Discounted future flows from continued use plus discounted residual."""
    residual_amount = _nonneg(residual, "residual")
    if end_of_life_period < schedule.max_period():
        raise PeriodInconsistent(
            f"end of life period {end_of_life_period} precedes the last flow "
            f"at period {schedule.max_period()}")
    base = Decimal(1) + schedule.rate
    return money(_discounted_sum(schedule) + residual_amount / base ** end_of_life_period)


def recoverable_value(schedule: CashFlowSchedule, end_of_life_period: int, residual) -> Decimal:
    """Amount recoverable from future use including the alienation residual.

    The composition is the same as use_value; the two stay separate named
    operations because they answer different valuation questions.
    """
    return use_value(schedule, end_of_life_period, residual)


# --- issue costing ---------------------------------------------------------

def issue_cost(ledger: LotLedger, quantity, method: CostingMethod) -> tuple[Decimal, LotLedger]:
    """Cost of issuing ``quantity`` units and the ledger that remains.

    WAC prices every unit at total value / total quantity and collapses
    the remainder into a single average-cost lot; FIFO exhausts lots in
    chronological order; LIFO in reverse chronological order.  Partial
    lots keep their unit cost.
    """
    qty = _nonneg(quantity, "issue quantity")
    available = ledger.total_quantity()
    if qty > available:
        raise InsufficientQuantity(
            f"cannot issue {qty}; ledger holds {available}")
    if qty == 0:
        return money(0), ledger

    if method is CostingMethod.WAC:
        average = ledger.total_value() / available
        remaining_qty = available - qty
        if remaining_qty == 0:
            return money(qty * average), LotLedger(())
        return money(qty * average), LotLedger((Lot(1, remaining_qty, average),))

    order = ledger.lots if method is CostingMethod.FIFO else tuple(reversed(ledger.lots))
    need = qty
    cost = Decimal(0)
    leftovers: dict[int, Lot] = {lot.seq: lot for lot in ledger.lots}
    for lot in order:
        if need == 0:
            break
        take = min(lot.quantity, need)
        cost += take * lot.unit_cost
        need -= take
        kept = lot.quantity - take
        if kept == 0:
            del leftovers[lot.seq]
        else:
            leftovers[lot.seq] = Lot(lot.seq, kept, lot.unit_cost)
    remaining = LotLedger(tuple(
        leftovers[lot.seq] for lot in ledger.lots if lot.seq in leftovers))
    return money(cost), remaining
