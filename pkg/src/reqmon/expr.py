"""Non-temporal expression trees used in conditions and responses.

Boolean and numeric nodes live in separate families. ``SignalRef`` is the one
node shared by both: its type is decided by the context it appears in.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

CMP_OPS = ("<", "<=", ">", ">=", "==", "!=")


@dataclass(frozen=True)
class SignalRef:
    name: str


@dataclass(frozen=True)
class NumLit:
    value: float
    # Name of the mission parameter this literal was instantiated from, if any.
    # Excluded from equality so template output compares equal to hand-written text.
    param: str | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "NumExpr"


@dataclass(frozen=True)
class Add:
    lhs: "NumExpr"
    rhs: "NumExpr"


@dataclass(frozen=True)
class Sub:
    lhs: "NumExpr"
    rhs: "NumExpr"


@dataclass(frozen=True)
class Mul:
    lhs: "NumExpr"
    rhs: "NumExpr"


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Cmp:
    op: str
    lhs: "NumExpr"
    rhs: "NumExpr"


@dataclass(frozen=True)
class Not:
    operand: "BoolExpr"


@dataclass(frozen=True)
class And:
    lhs: "BoolExpr"
    rhs: "BoolExpr"


@dataclass(frozen=True)
class Or:
    lhs: "BoolExpr"
    rhs: "BoolExpr"


NumExpr = Union[NumLit, SignalRef, Neg, Add, Sub, Mul]
BoolExpr = Union[BoolLit, SignalRef, Cmp, Not, And, Or]

_ARITH_SYMBOL = {Add: "+", Sub: "-", Mul: "*"}


def format_number(value: float) -> str:
    """Shortest text that lexes back to exactly ``value``."""
    if value == int(value) and abs(value) < 1e21:
        return str(int(value))
    return repr(float(value))


def _num_text(e: NumExpr) -> str:
    if isinstance(e, NumLit):
        return format_number(e.value)
    if isinstance(e, SignalRef):
        return e.name
    if isinstance(e, Neg):
        inner = _num_text(e.operand)
        return f"-{inner}" if _num_atomic(e.operand) else f"-({inner})"
    sym = _ARITH_SYMBOL[type(e)]
    return f"{_num_wrap(e.lhs)} {sym} {_num_wrap(e.rhs)}"


def _num_atomic(e: NumExpr) -> bool:
    return isinstance(e, SignalRef) or (isinstance(e, NumLit) and e.value >= 0)


def _num_wrap(e: NumExpr) -> str:
    text = _num_text(e)
    return text if _num_atomic(e) else f"({text})"


def _bool_atomic(e: BoolExpr) -> bool:
    return isinstance(e, (BoolLit, SignalRef))


def _bool_wrap(e: BoolExpr) -> str:
    text = expr_text(e)
    return text if _bool_atomic(e) else f"({text})"


def expr_text(e: BoolExpr) -> str:
    """Canonical rendering: every non-atomic operand is parenthesised."""
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, SignalRef):
        return e.name
    if isinstance(e, Cmp):
        return f"{_num_wrap(e.lhs)} {e.op} {_num_wrap(e.rhs)}"
    if isinstance(e, Not):
        return f"!{_bool_wrap(e.operand)}"
    if isinstance(e, And):
        return f"{_bool_wrap(e.lhs)} & {_bool_wrap(e.rhs)}"
    if isinstance(e, Or):
        return f"{_bool_wrap(e.lhs)} | {_bool_wrap(e.rhs)}"
    raise TypeError(f"not a boolean expression: {e!r}")


def signal_uses(e: BoolExpr) -> list[tuple[str, str]]:
    """(name, "bool" | "num") for every signal occurrence, in reading order."""
    uses: list[tuple[str, str]] = []

    def num(n: NumExpr) -> None:
        if isinstance(n, SignalRef):
            uses.append((n.name, "num"))
        elif isinstance(n, Neg):
            num(n.operand)
        elif isinstance(n, (Add, Sub, Mul)):
            num(n.lhs)
            num(n.rhs)

    def boolean(b: BoolExpr) -> None:
        if isinstance(b, SignalRef):
            uses.append((b.name, "bool"))
        elif isinstance(b, Cmp):
            num(b.lhs)
            num(b.rhs)
        elif isinstance(b, Not):
            boolean(b.operand)
        elif isinstance(b, (And, Or)):
            boolean(b.lhs)
            boolean(b.rhs)

    boolean(e)
    return uses
