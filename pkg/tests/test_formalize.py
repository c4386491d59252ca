import pytest

from corpus import all_bool_traces
from reqmon.errors import NonMonitorable, TypeMismatch
from reqmon.expr import And, BoolLit, Cmp, NumLit, Or, SignalRef
from reqmon.formalize import formalize
from reqmon.formula import (
    FALSE,
    TRUE,
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
    fold,
    free_signals,
    print_formula,
    signal_types,
    subformulas,
)
from reqmon.fretish import parse_requirement
from reqmon.semantics import verdict_stream

REQ1 = (
    "in flight_mode the aircraft shall always satisfy "
    "horizontal_intruder_distance > 250 | vertical_intruder_distance > 50"
)
H_GT = Cmp(">", SignalRef("horizontal_intruder_distance"), NumLit(250))
V_GT = Cmp(">", SignalRef("vertical_intruder_distance"), NumLit(50))


def fz(src):
    return formalize(parse_requirement(src))


def a(name):
    return Atom(SignalRef(name))


class TestTemplates:
    def test_requirement_one_shape(self):
        assert fz(REQ1) == Historically(Implies(a("flight_mode"), Atom(Or(H_GT, V_GT))))

    def test_global_always_folds_guard(self):
        assert fz("the sys shall satisfy r") == Historically(a("r"))

    def test_global_true_response_folds_to_true(self):
        assert fz("sys shall satisfy true") == TRUE

    def test_never(self):
        assert fz("in m mode the s shall never satisfy r") == Historically(Implies(a("m"), LNot(a("r"))))

    def test_condition_always(self):
        m, c, r = a("m"), a("c"), a("r")
        assert fz("in m mode when c the s shall always satisfy r") == Historically(
            Implies(Since(m, LAnd(m, c)), r))

    def test_upon_matches_when(self):
        assert fz("in m when c the s shall satisfy r") == fz("in m upon c the s shall satisfy r")

    def test_condition_within(self):
        m, c, r = a("m"), a("c"), a("r")
        pending = LAnd(m, LNot(r))
        start = LAnd(LAnd(m, c), LNot(r))
        assert fz("in m when c the s shall within 4 ticks satisfy r") == Historically(
            LNot(Since(pending, start, 4, None)))

    def test_global_condition_within_folds(self):
        assert print_formula(fz("when armed, the vehicle shall within 5 ticks satisfy ack")) == (
            "H (!((!(ack)) S[5,inf] ((armed) & (!(ack)))))")

    def test_within_without_trigger(self):
        with pytest.raises(NonMonitorable):
            fz("the s shall within 3 ticks satisfy r")

    def test_only_past_time_nodes(self):
        past = (Atom, LNot, LAnd, LOr, Implies, Yesterday, WeakYesterday, Once, Historically, Since)
        for src in (REQ1, "in m when c the s shall within 2 ticks satisfy r", "upon x the s shall never satisfy y"):
            assert all(isinstance(g, past) for g in subformulas(fz(src)))


class TestPrint:
    def test_historically(self):
        assert print_formula(Historically(a("p"))) == "H (p)"

    def test_since_bounds(self):
        assert print_formula(Since(a("a"), a("b"), 3, None)) == "(a) S[3,inf] (b)"

    def test_requirement_one(self):
        assert print_formula(fz(REQ1)) == (
            "H ((flight_mode) -> ((horizontal_intruder_distance > 250) | (vertical_intruder_distance > 50)))")

    def test_finite_bounds_and_unary(self):
        assert print_formula(Once(Yesterday(a("p")), 0, 2)) == "O[0,2] (Y (p))"
        assert print_formula(Historically(WeakYesterday(LNot(a("p"))), 1, None)) == "H[1,inf] (Z (!(p)))"


class TestSignals:
    def test_requirement_one(self):
        assert free_signals(fz(REQ1)) == {
            "flight_mode", "horizontal_intruder_distance", "vertical_intruder_distance"}

    def test_constant(self):
        assert free_signals(TRUE) == set()

    def test_since(self):
        assert free_signals(Since(a("a"), Atom(And(SignalRef("b"), SignalRef("c"))))) == {"a", "b", "c"}

    def test_types(self):
        assert signal_types(fz(REQ1)) == {
            "flight_mode": "bool",
            "horizontal_intruder_distance": "num",
            "vertical_intruder_distance": "num",
        }

    def test_conflicting_use(self):
        with pytest.raises(TypeMismatch):
            signal_types(fz("in x mode the s shall satisfy x > 1"))


def test_fold_preserves_semantics():
    p, q = a("p"), a("q")
    cases = [
        Implies(TRUE, p), LAnd(p, TRUE), LOr(FALSE, q), LNot(LNot(p)), Since(TRUE, q),
        Since(p, FALSE), Historically(TRUE), Once(FALSE, 1, 2), Implies(p, TRUE), LOr(p, TRUE),
        Since(TRUE, q, 2, 3), Historically(LAnd(p, FALSE), 2, None),
    ]
    traces = all_bool_traces(5)
    for f in cases:
        g = fold(f)
        for tr in traces:
            assert verdict_stream(f, tr) == verdict_stream(g, tr), (f, g)


# -- trigger and deadline semantics against direct characterisations ----------


def trigger_violated(m, c, r, t, never=False):
    """Some tick t1 with m & c starts an m-interval in which r fails at t2 <= t."""
    bad = [(not x) if not never else x for x in r]
    for t1 in range(t + 1):
        if not (m[t1] and c[t1]):
            continue
        for t2 in range(t1, t + 1):
            if not m[t2]:
                break
            if bad[t2]:
                return True
    return False


def deadline_violated(m, c, r, n, t):
    """A trigger (m & c & !r at t0) followed by m & !r through t0 + n, reached by t."""
    for t0 in range(t + 1):
        if not (m[t0] and c[t0] and not r[t0]):
            continue
        t_end = t0 + n
        if t_end > t:
            continue
        if all(m[s] and not r[s] for s in range(t0, t_end + 1)):
            return True
    return False


def check_exhaustively(formula, length, names, violated):
    for tr in all_bool_traces(length, names):
        cols = [tr.columns[nm] if nm in tr.columns else [True] * length for nm in ("m", "c", "r")]
        got = verdict_stream(formula, tr)
        for t in range(length):
            assert got[t] == (not violated(*cols, t)), (tr.columns, t)


@pytest.mark.parametrize("timing,never", [("always", False), ("never", True)])
def test_trigger_semantics_in_mode(timing, never):
    f = fz(f"in m mode when c the s shall {timing} satisfy r")
    check_exhaustively(f, 5, ("m", "c", "r"), lambda m, c, r, t: trigger_violated(m, c, r, t, never))


def test_trigger_semantics_global():
    f = fz("when c the s shall always satisfy r")
    check_exhaustively(f, 6, ("c", "r"), trigger_violated)


@pytest.mark.parametrize("n", [1, 2])
def test_deadline_semantics_in_mode(n):
    f = fz(f"in m mode when c the s shall within {n} ticks satisfy r")
    check_exhaustively(f, 5, ("m", "c", "r"), lambda m, c, r, t: deadline_violated(m, c, r, n, t))


@pytest.mark.parametrize("n", [1, 3])
def test_deadline_semantics_global(n):
    f = fz(f"when c the s shall within {n} ticks satisfy r")
    check_exhaustively(f, 6, ("c", "r"), lambda m, c, r, t: deadline_violated(m, c, r, n, t))


def test_mode_guard_is_vacuous_when_mode_off():
    f = fz(REQ1)
    from reqmon.semantics import Trace

    tr = Trace({"flight_mode": [False] * 4,
                "horizontal_intruder_distance": [0.0] * 4,
                "vertical_intruder_distance": [0.0] * 4})
    assert verdict_stream(f, tr) == [True] * 4


def test_literal_response_atom():
    assert fz("in m mode the s shall satisfy false") == Historically(LNot(a("m")))
    assert Atom(BoolLit(True)) == TRUE
