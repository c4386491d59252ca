"""Incremental, fixed-memory monitor evaluation.

A formula is compiled once into a topologically ordered plan. Each temporal
node owns a fixed slice of the monitor state:

* ``Y``/``Z``: one latch.
* ``O``/``H`` over ``[lo, inf)``: a latch, plus a counter saturating at ``lo``
  when ``lo > 0`` (age of the first witness / first violation).
* ``O``/``H`` over ``[lo, hi]``: a ring of ``hi + 1`` child values and a
  sliding count of hits in the window.
* ``S`` over ``[lo, inf)``: a latch and, when ``lo > 0``, the age of the oldest
  live witness saturating at ``lo``.
* ``S`` over ``[lo, hi]``: a ring of ``hi + 1`` right-operand values, the
  youngest in-window witness age, and the age of the last left-operand failure.

Nothing grows with the trace, so every step costs O(formula size).
"""

from __future__ import annotations

import math
import struct
from array import array
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

from .errors import BoundTooLarge, EmptyInput, HeterogeneousTypes, MissingSignal, TypeMismatch, UnsupportedConstruct
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
    children,
    signal_types,
)

BOUND_CAP = 65535


@dataclass(frozen=True)
class PlanNode:
    """One evaluation step. ``args`` index earlier nodes of the plan."""

    kind: str
    formula: Formula
    args: tuple[int, ...] = ()
    lo: int = 0
    hi: int | None = None
    latch: int | None = None
    counters: tuple[int, ...] = ()
    buffer: int | None = None


@dataclass(frozen=True)
class StateLayout:
    latch_init: tuple[int, ...]
    counter_init: tuple[int, ...]
    buffer_specs: tuple[tuple[int, int], ...]  # (size, initial fill)

    @property
    def n_latches(self) -> int:
        return len(self.latch_init)

    @property
    def buffer_sizes(self) -> tuple[int, ...]:
        return tuple(size for size, _ in self.buffer_specs)


def build_plan(f: Formula, cap: int = BOUND_CAP) -> tuple[list[PlanNode], StateLayout]:
    """Flatten ``f`` into children-first order, sharing repeated sub-formulas."""
    nodes: list[PlanNode] = []
    index: dict[Formula, int] = {}
    latches: list[int] = []
    counters: list[int] = []
    buffers: list[tuple[int, int]] = []

    def latch(init: int) -> int:
        latches.append(init)
        return len(latches) - 1

    def counter(init: int) -> int:
        counters.append(init)
        return len(counters) - 1

    def buffer(size: int, fill: int) -> int:
        buffers.append((size, fill))
        return len(buffers) - 1

    def visit(g: Formula) -> int:
        if g in index:
            return index[g]
        args = tuple(visit(c) for c in children(g))
        if isinstance(g, (Once, Historically, Since)):
            for bound in (g.lo, g.hi):
                if bound is not None and bound > cap:
                    raise BoundTooLarge(bound, cap)

        if isinstance(g, Atom):
            node = PlanNode("atom", g)
        elif isinstance(g, LNot):
            node = PlanNode("not", g, args)
        elif isinstance(g, LAnd):
            node = PlanNode("and", g, args)
        elif isinstance(g, LOr):
            node = PlanNode("or", g, args)
        elif isinstance(g, Implies):
            node = PlanNode("implies", g, args)
        elif isinstance(g, (Yesterday, WeakYesterday)):
            kind = "yesterday" if isinstance(g, Yesterday) else "weak_yesterday"
            node = PlanNode(kind, g, args, latch=latch(0 if kind == "yesterday" else 1))
        elif isinstance(g, (Once, Historically)):
            is_once = isinstance(g, Once)
            base = "once" if is_once else "historically"
            if g.hi is None:
                ctr = (counter(0),) if g.lo > 0 else ()
                node = PlanNode(base, g, args, g.lo, None, latch=latch(0 if is_once else 1), counters=ctr)
            else:
                # counters: cursor, hits in window
                node = PlanNode(
                    base + "_window", g, args, g.lo, g.hi,
                    counters=(counter(0), counter(0)),
                    buffer=buffer(g.hi + 1, 0 if is_once else 1),
                )
        elif isinstance(g, Since):
            if g.hi is None:
                ctr = (counter(0),) if g.lo > 0 else ()
                node = PlanNode("since", g, args, g.lo, None, latch=latch(0), counters=ctr)
            else:
                # counters: cursor, youngest witness age >= lo, age of last lhs failure
                none = g.hi + 1
                node = PlanNode(
                    "since_window", g, args, g.lo, g.hi,
                    counters=(counter(0), counter(none), counter(none)),
                    buffer=buffer(g.hi + 1, 0),
                )
        else:
            raise UnsupportedConstruct(f"cannot compile {type(g).__name__}")
        nodes.append(node)
        index[g] = len(nodes) - 1
        return index[g]

    visit(f)
    return nodes, StateLayout(tuple(latches), tuple(counters), tuple(buffers))


class MonitorState:
    """Fixed-size storage for one compiled formula."""

    def __init__(self, layout: StateLayout):
        self.layout = layout
        self.latches = bytearray(layout.latch_init)
        self.counters = array("I", layout.counter_init)
        self.buffers = [bytearray([fill]) * size for size, fill in layout.buffer_specs]
        self.tick_count = 0

    def reset(self) -> None:
        # In place: compiled step closures hold references to these containers.
        self.latches[:] = bytes(self.layout.latch_init)
        self.counters[:] = array("I", self.layout.counter_init)
        for buf, (size, fill) in zip(self.buffers, self.layout.buffer_specs):
            buf[:] = bytes([fill]) * size
        self.tick_count = 0

    def snapshot(self) -> tuple:
        return (bytes(self.latches), self.counters.tobytes(), [bytes(b) for b in self.buffers], self.tick_count)

    def restore(self, snap: tuple) -> None:
        latches, counters, buffers, tick = snap
        self.latches[:] = latches
        self.counters[:] = array("I", counters)
        for buf, saved in zip(self.buffers, buffers):
            buf[:] = saved
        self.tick_count = tick

    def serialize(self) -> bytes:
        parts = [
            struct.pack("<Q", self.tick_count),
            bytes(self.latches),
            self.counters.tobytes(),
        ]
        parts.extend(bytes(b) for b in self.buffers)
        return b"".join(parts)

    def size_bits(self) -> int:
        return 8 * len(self.serialize())


# ---------------------------------------------------------------------------
# expression compilation

_CMP = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}

Inputs = Mapping[str, Any]


def _compile_num(e: NumExpr) -> Callable[[Inputs], float]:
    if isinstance(e, NumLit):
        v = e.value
        return lambda inp: v
    if isinstance(e, SignalRef):
        name = e.name
        return lambda inp: inp[name]
    if isinstance(e, Neg):
        f = _compile_num(e.operand)
        return lambda inp: -f(inp)
    a, b = _compile_num(e.lhs), _compile_num(e.rhs)
    if isinstance(e, Add):
        return lambda inp: a(inp) + b(inp)
    if isinstance(e, Sub):
        return lambda inp: a(inp) - b(inp)
    if isinstance(e, Mul):
        return lambda inp: a(inp) * b(inp)
    raise UnsupportedConstruct(f"numeric node {type(e).__name__}")


def _compile_bool(e: BoolExpr) -> Callable[[Inputs], bool]:
    if isinstance(e, BoolLit):
        v = e.value
        return lambda inp: v
    if isinstance(e, SignalRef):
        name = e.name
        return lambda inp: inp[name]
    if isinstance(e, Cmp):
        op = _CMP[e.op]
        a, b = _compile_num(e.lhs), _compile_num(e.rhs)
        return lambda inp: op(a(inp), b(inp))
    if isinstance(e, Not):
        f = _compile_bool(e.operand)
        return lambda inp: not f(inp)
    a, b = _compile_bool(e.lhs), _compile_bool(e.rhs)
    if isinstance(e, And):
        return lambda inp: a(inp) and b(inp)
    if isinstance(e, Or):
        return lambda inp: a(inp) or b(inp)
    raise UnsupportedConstruct(f"boolean node {type(e).__name__}")


# ---------------------------------------------------------------------------
# node evaluators: each takes the value list and the inputs, returns a bool


def _node_fn(node: PlanNode, st: MonitorState) -> Callable[[list, Inputs], bool]:
    k = node.kind
    args = node.args
    if k == "atom":
        atom = _compile_bool(node.formula.expr)
        return lambda v, inp: atom(inp)
    if k == "not":
        (a,) = args
        return lambda v, inp: not v[a]
    if k == "and":
        a, b = args
        return lambda v, inp: v[a] and v[b]
    if k == "or":
        a, b = args
        return lambda v, inp: v[a] or v[b]
    if k == "implies":
        a, b = args
        return lambda v, inp: (not v[a]) or v[b]

    L = st.latches
    C = st.counters
    lo, hi = node.lo, node.hi

    if k in ("yesterday", "weak_yesterday"):
        (a,) = args
        i = node.latch

        def delay(v, inp):
            out = L[i] == 1
            L[i] = v[a]
            return out

        return delay

    if k in ("once", "historically"):
        (a,) = args
        i = node.latch
        # Once latches "witness seen"; Historically latches "no violation seen".
        hit_on = k == "once"
        if lo == 0:
            if hit_on:
                def once(v, inp):
                    if v[a]:
                        L[i] = 1
                    return L[i] == 1
                return once

            def hist(v, inp):
                if not v[a]:
                    L[i] = 0
                return L[i] == 1
            return hist

        (age,) = node.counters
        seen_value = 1 if hit_on else 0

        def unbounded(v, inp):
            if L[i] == seen_value:
                if C[age] < lo:
                    C[age] += 1
            elif bool(v[a]) == hit_on:
                L[i] = seen_value
                C[age] = 0
            triggered = L[i] == seen_value and C[age] >= lo
            return triggered if hit_on else not triggered

        return unbounded

    if k in ("once_window", "historically_window"):
        (a,) = args
        cur, hits = node.counters
        buf = st.buffers[node.buffer]
        m = hi + 1
        hit_value = 1 if k == "once_window" else 0

        def window(v, inp):
            new = 1 if v[a] else 0
            c = C[cur]
            entering = new if lo == 0 else buf[(c - (lo - 1)) % m]
            leaving = buf[(c + 1) % m]
            C[hits] += (entering == hit_value) - (leaving == hit_value)
            c = (c + 1) % m
            buf[c] = new
            C[cur] = c
            return C[hits] > 0 if hit_value else C[hits] == 0

        return window

    if k == "since":
        a, b = args
        i = node.latch
        if lo == 0:
            def since(v, inp):
                L[i] = 1 if (v[b] or (v[a] and L[i])) else 0
                return L[i] == 1
            return since

        (age,) = node.counters

        def since_lo(v, inp):
            if L[i] and v[a]:
                if C[age] < lo:
                    C[age] += 1
            elif v[b]:
                L[i] = 1
                C[age] = 0
            else:
                L[i] = 0
            return L[i] == 1 and C[age] >= lo

        return since_lo

    if k == "since_window":
        a, b = args
        cur, youngest, since_fail = node.counters
        buf = st.buffers[node.buffer]
        m = hi + 1
        none = hi + 1

        def since_window(v, inp):
            C[since_fail] = 0 if not v[a] else min(C[since_fail] + 1, none)
            new = 1 if v[b] else 0
            c = C[cur]
            entering = new if lo == 0 else buf[(c - (lo - 1)) % m]
            C[youngest] = lo if entering else min(C[youngest] + 1, none)
            c = (c + 1) % m
            buf[c] = new
            C[cur] = c
            y = C[youngest]
            return y <= hi and y <= C[since_fail]

        return since_window

    raise UnsupportedConstruct(f"plan node {k}")


def _check_input(name: str, kind: str, inputs: Inputs) -> None:
    if name not in inputs:
        raise MissingSignal(name)
    value = inputs[name]
    if kind == "bool":
        if not isinstance(value, bool):
            raise TypeMismatch(name, "bool", type(value).__name__)
    elif isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TypeMismatch(name, "num", type(value).__name__)
    elif not math.isfinite(value):
        raise TypeMismatch(name, "num", "non-finite number")


@dataclass(eq=False)
class CompiledMonitor:
    formula: Formula
    plan: list[PlanNode]
    state: MonitorState
    signal_layout: dict[str, int]
    signal_types: dict[str, str]
    requirement_id: str = ""
    _fns: list = field(default_factory=list, repr=False)

    def step(self, inputs: Inputs) -> bool:
        """Consume one tick of inputs and return this tick's verdict."""
        return bool(self.step_nodes(inputs)[-1])

    def step_nodes(self, inputs: Inputs) -> list[bool]:
        """Like step, but return the value of every plan node (root last)."""
        for name, kind in self.signal_types.items():
            _check_input(name, kind, inputs)
        vals = [False] * len(self._fns)
        for idx, fn in enumerate(self._fns):
            vals[idx] = fn(vals, inputs)
        self.state.tick_count += 1
        return vals

    def reset(self) -> None:
        self.state.reset()

    @property
    def tick(self) -> int:
        """Number of ticks consumed so far."""
        return self.state.tick_count

    def run(self, rows) -> list[bool]:
        return [self.step(row) for row in rows]


def compile_monitor(f: Formula, requirement_id: str = "", cap: int = BOUND_CAP) -> CompiledMonitor:
    types = signal_types(f)
    plan, layout = build_plan(f, cap)
    state = MonitorState(layout)
    mon = CompiledMonitor(
        formula=f,
        plan=plan,
        state=state,
        signal_layout={name: slot for slot, name in enumerate(sorted(types))},
        signal_types=dict(sorted(types.items())),
        requirement_id=requirement_id,
    )
    mon._fns = [_node_fn(node, state) for node in plan]
    return mon


def step(mon: CompiledMonitor, inputs: Inputs) -> bool:
    return mon.step(inputs)


def reset(mon: CompiledMonitor) -> None:
    mon.reset()


@dataclass(frozen=True)
class Verdict:
    requirement_id: str
    tick: int
    ok: bool


class _NoMajority:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NO_MAJORITY"

    def __bool__(self) -> bool:
        return False


NO_MAJORITY = _NoMajority()


def majority(values: Sequence):
    """Boyer-Moore vote: the value held by more than half of ``values``, else NO_MAJORITY."""
    if not values:
        raise EmptyInput("majority of an empty list")
    kinds = {isinstance(v, bool) for v in values}
    if len(kinds) > 1:
        raise HeterogeneousTypes("majority needs all-boolean or all-numeric values")

    candidate = None
    count = 0
    for v in values:
        if count == 0:
            candidate, count = v, 1
        elif v == candidate:
            count += 1
        else:
            count -= 1
    # The pairing pass only yields a candidate; a second pass confirms it.
    occurrences = sum(1 for v in values if v == candidate)
    return candidate if 2 * occurrences > len(values) else NO_MAJORITY
