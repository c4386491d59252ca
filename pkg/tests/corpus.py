"""Formula/trace generators shared by the differential tests."""

from __future__ import annotations

import itertools
import random
import shutil
import subprocess
from pathlib import Path

from reqmon.engine import compile_monitor
from reqmon.expr import Cmp, NumLit, SignalRef
from reqmon.formula import (
    Atom,
    Historically,
    Implies,
    LAnd,
    LNot,
    LOr,
    Once,
    Since,
    WeakYesterday,
    Yesterday,
)
from reqmon.semantics import Trace, verdict_stream

P = Atom(SignalRef("p"))
Q = Atom(SignalRef("q"))

# Every interval with endpoints drawn from {0, 1, 2, inf}.
SMALL_BOUNDS = [(lo, hi) for lo in (0, 1, 2) for hi in (0, 1, 2, None) if hi is None or lo <= hi]


def unary_ops(bounds=SMALL_BOUNDS):
    ops = [LNot, Yesterday, WeakYesterday]
    ops += [lambda g, lo=lo, hi=hi: Once(g, lo, hi) for lo, hi in bounds]
    ops += [lambda g, lo=lo, hi=hi: Historically(g, lo, hi) for lo, hi in bounds]
    return ops


def binary_ops(bounds=SMALL_BOUNDS):
    ops = [LAnd, LOr, Implies]
    ops += [lambda a, b, lo=lo, hi=hi: Since(a, b, lo, hi) for lo, hi in bounds]
    return ops


def formulas_up_to_depth(depth: int, atoms=(P, Q)):
    """Every formula of at most ``depth`` levels (atoms are depth 1)."""
    layers = [list(atoms)]
    for _ in range(depth - 1):
        everything = [f for layer in layers for f in layer]
        prev = layers[-1]
        new = [op(g) for op in unary_ops() for g in prev]
        for op in binary_ops():
            for a in everything:
                for b in everything:
                    if a in prev or b in prev:
                        new.append(op(a, b))
        layers.append(new)
    return [f for layer in layers for f in layer]


BOUNDS_WIDE = SMALL_BOUNDS + [(0, 5), (3, 7), (4, None), (0, 20), (10, 30)]


def random_formula(rng: random.Random, depth: int, atoms=(P, Q), bounds=BOUNDS_WIDE):
    if depth <= 1 or rng.random() < 0.15:
        return rng.choice(atoms)
    kind = rng.randrange(10)
    sub = lambda: random_formula(rng, depth - 1, atoms, bounds)  # noqa: E731
    lo, hi = rng.choice(bounds)
    if kind == 0:
        return LNot(sub())
    if kind == 1:
        return LAnd(sub(), sub())
    if kind == 2:
        return LOr(sub(), sub())
    if kind == 3:
        return Implies(sub(), sub())
    if kind == 4:
        return Yesterday(sub())
    if kind == 5:
        return WeakYesterday(sub())
    if kind in (6, 7):
        return Once(sub(), lo, hi) if kind == 6 else Historically(sub(), lo, hi)
    return Since(sub(), sub(), lo, hi)


def random_bool_trace(rng: random.Random, length: int, names=("p", "q")) -> Trace:
    bias = {n: rng.choice((0.2, 0.5, 0.8, 0.95)) for n in names}
    return Trace({n: [rng.random() < bias[n] for _ in range(length)] for n in names}, length)


# Numeric atoms for the codegen corpus.
NUMERIC_ATOMS = (
    P,
    Q,
    Atom(Cmp(">", SignalRef("x"), NumLit(0.5))),
    Atom(Cmp("<=", SignalRef("x"), NumLit(0.25))),
)


def random_mixed_trace(rng: random.Random, length: int) -> Trace:
    return Trace(
        {
            "p": [rng.random() < 0.7 for _ in range(length)],
            "q": [rng.random() < 0.4 for _ in range(length)],
            "x": [rng.choice((0.0, 0.25, 0.5, 0.75, rng.random())) for _ in range(length)],
        },
        length,
    )


def all_bool_traces(length: int, names=("p", "q")) -> list[Trace]:
    traces = []
    for bits in itertools.product((False, True), repeat=length * len(names)):
        cols = {n: list(bits[i::len(names)]) for i, n in enumerate(names)}
        traces.append(Trace(cols, length))
    return traces


def engine_prefix_tree(f, length: int, names=("p", "q"), nodes: bool = False) -> dict[tuple, object]:
    """Run a monitor over every boolean trace of length <= ``length``.

    Depth-first over the prefix tree, restoring state on backtrack, so each
    prefix is stepped once. Keys are tuples of per-tick rows (tuples of bools);
    values are verdicts, or every plan node's value when ``nodes`` is set.
    """
    mon = compile_monitor(f)
    letters = list(itertools.product((False, True), repeat=len(names)))
    out: dict[tuple, object] = {}
    advance = mon.step_nodes if nodes else mon.step

    def walk(prefix: tuple) -> None:
        if len(prefix) == length:
            return
        snap = mon.state.snapshot()
        for letter in letters:
            row = dict(zip(names, letter))
            key = prefix + (letter,)
            out[key] = advance(row)
            walk(key)
            mon.state.restore(snap)

    walk(())
    return out


_KEY_CACHE: dict[tuple[int, int], tuple[list, list]] = {}


def prefix_keys(traces: list[Trace], length: int) -> list[list[tuple]]:
    """Prefix-tree keys (see engine_prefix_tree) for every tick of every trace, cached per list."""
    hit = _KEY_CACHE.get((id(traces), length))
    if hit is None or hit[0] is not traces:
        keys = []
        for tr in traces:
            rows = list(zip(tr.columns["p"], tr.columns["q"]))
            keys.append([tuple(rows[: t + 1]) for t in range(length)])
        hit = (traces, keys)
        _KEY_CACHE[(id(traces), length)] = hit
    return hit[1]


def exhaustive_mismatches(f, traces: list[Trace], length: int) -> list:
    """Compare engine (prefix tree) with oracle on every prefix of every trace."""
    engine = engine_prefix_tree(f, length)
    bad = []
    for tr, keys in zip(traces, prefix_keys(traces, length)):
        oracle = verdict_stream(f, tr)
        for t in range(length):
            if engine[keys[t]] != oracle[t]:
                bad.append((tr, t))
                break
    return bad


def node_mismatches(f, traces: list[Trace], length: int) -> list:
    """Like exhaustive_mismatches, but every plan node against its sub-formula's oracle stream."""
    mon = compile_monitor(f)
    engine = engine_prefix_tree(f, length, nodes=True)
    bad = []
    for tr, keys in zip(traces, prefix_keys(traces, length)):
        oracle = [verdict_stream(node.formula, tr) for node in mon.plan]
        for t in range(length):
            vals = engine[keys[t]]
            if any(bool(v) != col[t] for v, col in zip(vals, oracle)):
                bad.append((tr, t))
                break
    return bad


def random_formula_of_depth(rng: random.Random, depth_: int, atoms=(P, Q), bounds=SMALL_BOUNDS):
    """A random formula whose depth is exactly ``depth_``."""
    from reqmon.formula import depth

    while True:
        f = random_formula(rng, depth_, atoms, bounds)
        if depth(f) == depth_:
            return f


def c_compiler() -> str | None:
    for cc in ("cc", "gcc", "clang"):
        path = shutil.which(cc)
        if path:
            return path
    return None


def compile_c(source: str, workdir: Path, name: str = "monitor") -> Path:
    src = workdir / f"{name}.c"
    exe = workdir / name
    src.write_text(source, encoding="utf-8")
    cc = c_compiler()
    assert cc is not None
    proc = subprocess.run(
        [cc, "-std=c99", "-pedantic", "-Wall", "-Werror", "-O1", "-o", str(exe), str(src)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return exe


def run_c(exe: Path, stdin: str) -> subprocess.CompletedProcess:
    return subprocess.run([str(exe)], input=stdin, capture_output=True, text=True)


def parse_c_verdicts(stdout: str) -> dict[str, list[bool]]:
    out: dict[str, list[bool]] = {}
    for line in stdout.splitlines():
        tick, req_id, v = line.split(",")
        col = out.setdefault(req_id, [])
        assert int(tick) == len(col)
        col.append(v == "1")
    return out
