"""Past-time metric temporal formulas over boolean expressions.

Interval bounds are in ticks. ``hi=None`` stands for an unbounded upper end,
so the untimed operators are the ``[0, None]`` case.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

from .errors import TypeMismatch
from .expr import BoolExpr, BoolLit, expr_text, signal_uses


def _check_bounds(lo: int, hi: int | None) -> None:
    if lo < 0 or (hi is not None and hi < lo):
        raise ValueError(f"bad interval [{lo},{'inf' if hi is None else hi}]")


@dataclass(frozen=True)
class Atom:
    expr: BoolExpr


@dataclass(frozen=True)
class LNot:
    operand: "Formula"


@dataclass(frozen=True)
class LAnd:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class LOr:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Implies:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Yesterday:
    operand: "Formula"


@dataclass(frozen=True)
class WeakYesterday:
    operand: "Formula"


@dataclass(frozen=True)
class Once:
    operand: "Formula"
    lo: int = 0
    hi: int | None = None

    def __post_init__(self) -> None:
        _check_bounds(self.lo, self.hi)


@dataclass(frozen=True)
class Historically:
    operand: "Formula"
    lo: int = 0
    hi: int | None = None

    def __post_init__(self) -> None:
        _check_bounds(self.lo, self.hi)


@dataclass(frozen=True)
class Since:
    lhs: "Formula"
    rhs: "Formula"
    lo: int = 0
    hi: int | None = None

    def __post_init__(self) -> None:
        _check_bounds(self.lo, self.hi)


Formula = Union[Atom, LNot, LAnd, LOr, Implies, Yesterday, WeakYesterday, Once, Historically, Since]

TRUE = Atom(BoolLit(True))
FALSE = Atom(BoolLit(False))

_BINARY = {LAnd: "&", LOr: "|", Implies: "->"}
_UNARY = {LNot: "!", Yesterday: "Y", WeakYesterday: "Z", Once: "O", Historically: "H"}


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, Atom):
        return ()
    if isinstance(f, (LAnd, LOr, Implies, Since)):
        return (f.lhs, f.rhs)
    return (f.operand,)


def subformulas(f: Formula) -> Iterator[Formula]:
    """Post-order walk: children before parents."""
    for c in children(f):
        yield from subformulas(c)
    yield f


def depth(f: Formula) -> int:
    return 1 + max((depth(c) for c in children(f)), default=0)


def _bounds_text(f) -> str:
    if f.lo == 0 and f.hi is None:
        return ""
    return f"[{f.lo},{'inf' if f.hi is None else f.hi}]"


def print_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        return expr_text(f.expr)
    if type(f) in _BINARY:
        return f"({print_formula(f.lhs)}) {_BINARY[type(f)]} ({print_formula(f.rhs)})"
    if isinstance(f, Since):
        return f"({print_formula(f.lhs)}) S{_bounds_text(f)} ({print_formula(f.rhs)})"
    op = _UNARY[type(f)]
    if isinstance(f, (Once, Historically)):
        op += _bounds_text(f)
    if isinstance(f, LNot):
        return f"!({print_formula(f.operand)})"
    return f"{op} ({print_formula(f.operand)})"


def free_signals(f: Formula) -> set[str]:
    return {name for name, _ in _uses(f)}


def _uses(f: Formula) -> Iterator[tuple[str, str]]:
    for sub in subformulas(f):
        if isinstance(sub, Atom):
            yield from signal_uses(sub.expr)


def signal_types(f: Formula) -> dict[str, str]:
    """Map each free signal to "bool" or "num"; conflicting uses raise TypeMismatch."""
    types: dict[str, str] = {}
    for name, kind in _uses(f):
        prev = types.setdefault(name, kind)
        if prev != kind:
            raise TypeMismatch(name, prev, kind)
    return types


def _const(f: Formula) -> bool | None:
    if isinstance(f, Atom) and isinstance(f.expr, BoolLit):
        return f.expr.value
    return None


def fold(f: Formula) -> Formula:
    """Bottom-up constant folding of literal ``true``/``false`` sub-formulas.

    Only rewrites that hold at every tick of every finite trace are applied.
    """
    if isinstance(f, Atom):
        return f
    kids = [fold(c) for c in children(f)]
    consts = [_const(k) for k in kids]
    if isinstance(f, LNot):
        if consts[0] is not None:
            return Atom(BoolLit(not consts[0]))
        return LNot(kids[0])
    if isinstance(f, (LAnd, LOr, Implies)):
        a, b = kids
        ca, cb = consts
        if isinstance(f, LAnd):
            if ca is False or cb is False:
                return FALSE
            if ca is True:
                return b
            if cb is True:
                return a
            return LAnd(a, b)
        if isinstance(f, LOr):
            if ca is True or cb is True:
                return TRUE
            if ca is False:
                return b
            if cb is False:
                return a
            return LOr(a, b)
        if ca is False or cb is True:
            return TRUE
        if ca is True:
            return b
        if cb is False:
            return fold(LNot(a))
        return Implies(a, b)
    (c,) = consts if len(consts) == 1 else (None,)
    if isinstance(f, Yesterday):
        return FALSE if c is False else Yesterday(kids[0])
    if isinstance(f, WeakYesterday):
        return TRUE if c is True else WeakYesterday(kids[0])
    if isinstance(f, Once):
        # Once[lo,..](true) is false while t < lo, so only the lo=0 case folds to true.
        if c is False or (c is True and f.lo == 0):
            return Atom(BoolLit(bool(c)))
        return Once(kids[0], f.lo, f.hi)
    if isinstance(f, Historically):
        if c is True or (c is False and f.lo == 0):
            return Atom(BoolLit(bool(c)))
        return Historically(kids[0], f.lo, f.hi)
    assert isinstance(f, Since)
    a, b = kids
    ca, cb = consts
    if cb is False:
        return FALSE
    if ca is True:
        return fold(Once(b, f.lo, f.hi))
    if cb is True and f.lo == 0:
        return TRUE
    return Since(a, b, f.lo, f.hi)
