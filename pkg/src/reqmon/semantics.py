"""Reference finite-trace semantics, evaluated directly from the definitions.

This module is the ground truth the incremental engine and the emitted C code
are tested against, so it favours obviousness over speed: each temporal
operator scans its window explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

from .errors import MissingSignal, TypeMismatch
from .expr import Add, And, BoolExpr, BoolLit, Cmp, Mul, Neg, Not, NumExpr, NumLit, Or, SignalRef, Sub
from .formula import (
    Atom,
    Formula,
    Historically,
    Implies,
    LAnd,
    LNot,
    LOr,
    Once,
    Since,
    WeakYesterday,
    Yesterday,
    signal_types,
)

Value = Union[bool, float]


def value_kind(v) -> str:
    if isinstance(v, bool):
        return "bool"
    if isinstance(v, (int, float)):
        return "num"
    return type(v).__name__


@dataclass
class Trace:
    """Tick-indexed signal columns of equal length."""

    columns: dict[str, list[Value]] = field(default_factory=dict)
    length: int = 0

    def __post_init__(self) -> None:
        lengths = {len(col) for col in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"columns differ in length: {sorted(lengths)}")
        if lengths:
            self.length = lengths.pop()
        for name, col in self.columns.items():
            kinds = {value_kind(v) for v in col}
            if len(kinds) > 1 or not kinds <= {"bool", "num"}:
                raise ValueError(f"column {name!r} is not homogeneously boolean or numeric")
            if kinds == {"num"}:
                if not all(math.isfinite(v) for v in col):
                    raise ValueError(f"column {name!r} contains a non-finite value")
                self.columns[name] = [float(v) for v in col]

    @classmethod
    def from_rows(cls, rows: Sequence[Mapping[str, Value]]) -> "Trace":
        names = list(rows[0]) if rows else []
        return cls({n: [r[n] for r in rows] for n in names}, len(rows))

    def kind(self, name: str) -> str | None:
        col = self.columns[name]
        return value_kind(col[0]) if col else None

    def row(self, t: int) -> dict[str, Value]:
        return {name: col[t] for name, col in self.columns.items()}


def check_signals(f: Formula, trace: Trace) -> None:
    """Fail fast if ``trace`` lacks a signal of ``f`` or carries it with the wrong type."""
    for name, kind in signal_types(f).items():
        if name not in trace.columns:
            raise MissingSignal(name)
        found = trace.kind(name)
        if found is not None and found != kind:
            raise TypeMismatch(name, kind, found)


def _signal(trace: Trace, name: str, t: int, kind: str) -> Value:
    try:
        v = trace.columns[name][t]
    except KeyError:
        raise MissingSignal(name) from None
    found = value_kind(v)
    if found != kind:
        raise TypeMismatch(name, kind, found)
    return v


def eval_num(e: NumExpr, trace: Trace, t: int) -> float:
    if isinstance(e, NumLit):
        return e.value
    if isinstance(e, SignalRef):
        return _signal(trace, e.name, t, "num")
    if isinstance(e, Neg):
        return -eval_num(e.operand, trace, t)
    a = eval_num(e.lhs, trace, t)
    b = eval_num(e.rhs, trace, t)
    if isinstance(e, Add):
        return a + b
    if isinstance(e, Sub):
        return a - b
    if isinstance(e, Mul):
        return a * b
    raise TypeError(f"not a numeric expression: {e!r}")


def eval_expr(e: BoolExpr, trace: Trace, t: int) -> bool:
    if isinstance(e, BoolLit):
        return e.value
    if isinstance(e, SignalRef):
        return _signal(trace, e.name, t, "bool")
    if isinstance(e, Cmp):
        a = eval_num(e.lhs, trace, t)
        b = eval_num(e.rhs, trace, t)
        return {
            "<": a < b, "<=": a <= b, ">": a > b,
            ">=": a >= b, "==": a == b, "!=": a != b,
        }[e.op]
    if isinstance(e, Not):
        return not eval_expr(e.operand, trace, t)
    a = eval_expr(e.lhs, trace, t)
    b = eval_expr(e.rhs, trace, t)
    if isinstance(e, And):
        return a and b
    if isinstance(e, Or):
        return a or b
    raise TypeError(f"not a boolean expression: {e!r}")


def _window(lo: int, hi: int | None, t: int) -> range:
    """Distances d in [lo, min(hi, t)]."""
    top = t if hi is None else min(hi, t)
    return range(lo, top + 1)


def _columns(f: Formula, trace: Trace, n: int, memo: dict) -> list[bool]:
    key = id(f)
    if key in memo:
        return memo[key][1]
    col = _compute(f, trace, n, memo)
    memo[key] = (f, col)  # keep f alive so its id is not reused
    return col


def _compute(f: Formula, trace: Trace, n: int, memo: dict) -> list[bool]:
    ticks = range(n)
    if isinstance(f, Atom):
        return [eval_expr(f.expr, trace, t) for t in ticks]
    if isinstance(f, (LAnd, LOr, Implies, Since)):
        p = _columns(f.lhs, trace, n, memo)
        q = _columns(f.rhs, trace, n, memo)
        if isinstance(f, LAnd):
            return [p[t] and q[t] for t in ticks]
        if isinstance(f, LOr):
            return [p[t] or q[t] for t in ticks]
        if isinstance(f, Implies):
            return [(not p[t]) or q[t] for t in ticks]
        out = []
        for t in ticks:
            hit = False
            for d in _window(0, f.hi, t):
                # p must hold on (t-d, t]; widening d adds tick t-d+1.
                if d >= 1 and not p[t - d + 1]:
                    break
                if d >= f.lo and q[t - d]:
                    hit = True
                    break
            out.append(hit)
        return out
    p = _columns(f.operand, trace, n, memo)
    if isinstance(f, LNot):
        return [not p[t] for t in ticks]
    if isinstance(f, Yesterday):
        return [t >= 1 and p[t - 1] for t in ticks]
    if isinstance(f, WeakYesterday):
        return [t == 0 or p[t - 1] for t in ticks]
    if isinstance(f, Once):
        return [any(p[t - d] for d in _window(f.lo, f.hi, t)) for t in ticks]
    if isinstance(f, Historically):
        return [all(p[t - d] for d in _window(f.lo, f.hi, t)) for t in ticks]
    raise TypeError(f"not a formula: {f!r}")


def verdict_stream(f: Formula, trace: Trace) -> list[bool]:
    check_signals(f, trace)
    return _columns(f, trace, trace.length, {})


def eval_formula(f: Formula, trace: Trace, t: int) -> bool:
    if not 0 <= t < trace.length:
        raise IndexError(f"tick {t} outside trace of length {trace.length}")
    check_signals(f, trace)
    return _columns(f, trace, t + 1, {})[t]
