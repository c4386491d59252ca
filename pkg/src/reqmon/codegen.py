"""C99 source emission for compiled monitors.

The emitted translation unit exposes::

    void monitor_init(monitor_state_t *);
    void monitor_step(monitor_state_t *, const monitor_input_t *, unsigned char *verdicts);

State is a single struct of fixed-size arrays whose sizes come from the
formula bounds; the monitor part includes no headers and never allocates.
Stateless sub-formulas are inlined as C expressions, temporal nodes become
locals updated from their state slots in plan order.
"""

from __future__ import annotations

from typing import Sequence

from .engine import BOUND_CAP, PlanNode, build_plan
from .errors import TypeMismatch, UnsupportedConstruct
from .expr import Add, And, BoolExpr, BoolLit, Cmp, Mul, Neg, Not, NumExpr, NumLit, Or, SignalRef, Sub
from .formula import Formula, print_formula, signal_types

C_KEYWORDS = frozenset(
    "auto break case char const continue default do double else enum extern float for goto if "
    "inline int long register restrict return short signed sizeof static struct switch typedef "
    "union unsigned void volatile while _Bool _Complex _Imaginary main".split()
)

STATE_T = "monitor_state_t"
INPUT_T = "monitor_input_t"
PARAMS_T = "monitor_params_t"

Monitors = Sequence[tuple[str, Formula]]


def c_double(value: float) -> str:
    text = repr(float(value))
    return f"({text})" if value < 0 else text


def _check_name(name: str, what: str) -> None:
    if name in C_KEYWORDS or name.startswith("mon_") or name.startswith("monitor_"):
        raise UnsupportedConstruct(f"{what} {name!r} collides with a C keyword or generated name")


class _Emitter:
    def __init__(self, monitors: Monitors, parametric: bool, cap: int):
        self.monitors = list(monitors)
        self.parametric = parametric
        self.cap = cap
        self.signals: dict[str, str] = {}
        self.params: dict[str, float] = {}
        self.plans = []
        for req_id, f in self.monitors:
            for name, kind in signal_types(f).items():
                _check_name(name, "signal")
                prev = self.signals.setdefault(name, kind)
                if prev != kind:
                    raise TypeMismatch(name, prev, kind)
            self.plans.append(build_plan(f, cap))
        self.signals = dict(sorted(self.signals.items()))

    # -- expressions ---------------------------------------------------------

    def num(self, e: NumExpr) -> str:
        if isinstance(e, NumLit):
            if self.parametric and e.param is not None:
                _check_name(e.param, "parameter")
                prev = self.params.setdefault(e.param, e.value)
                if prev != e.value:
                    raise UnsupportedConstruct(f"parameter {e.param} bound to both {prev} and {e.value}")
                return f"mon_s->params.{e.param}"
            return c_double(e.value)
        if isinstance(e, SignalRef):
            return e.name
        if isinstance(e, Neg):
            return f"-({self.num(e.operand)})"
        op = {Add: "+", Sub: "-", Mul: "*"}.get(type(e))
        if op is None:
            raise UnsupportedConstruct(f"numeric node {type(e).__name__}")
        return f"({self.num(e.lhs)}) {op} ({self.num(e.rhs)})"

    def boolean(self, e: BoolExpr) -> str:
        if isinstance(e, BoolLit):
            return "1" if e.value else "0"
        if isinstance(e, SignalRef):
            return e.name
        if isinstance(e, Cmp):
            return f"{self._num_operand(e.lhs)} {e.op} {self._num_operand(e.rhs)}"
        if isinstance(e, Not):
            return f"!({self.boolean(e.operand)})"
        if isinstance(e, And):
            return f"({self.boolean(e.lhs)}) && ({self.boolean(e.rhs)})"
        if isinstance(e, Or):
            return f"({self.boolean(e.lhs)}) || ({self.boolean(e.rhs)})"
        raise UnsupportedConstruct(f"boolean node {type(e).__name__}")

    def _num_operand(self, e: NumExpr) -> str:
        text = self.num(e)
        if isinstance(e, SignalRef) or (isinstance(e, NumLit) and not text.startswith("(")):
            return text
        return f"({text})"

    # -- monitors ------------------------------------------------------------

    def monitor_body(self, m: int, plan: list[PlanNode]) -> tuple[list[str], str]:
        """Statements for monitor ``m`` and the C expression of its verdict."""
        lines: list[str] = []
        exprs: list[str] = []
        temps: list[str] = []
        L = f"mon_s->m{m}_l"
        C = f"mon_s->m{m}_c"
        for k, node in enumerate(plan):
            a = [exprs[i] for i in node.args]
            kind = node.kind
            if kind == "atom":
                exprs.append(self.boolean(node.formula.expr))
                continue
            if kind == "not":
                exprs.append(f"!({a[0]})")
                continue
            if kind == "and":
                exprs.append(f"({a[0]}) && ({a[1]})")
                continue
            if kind == "or":
                exprs.append(f"({a[0]}) || ({a[1]})")
                continue
            if kind == "implies":
                exprs.append(f"({a[0]}) ? ({a[1]}) : 1")
                continue

            t = f"mon_t{k}"
            temps.append(t)
            exprs.append(t)
            lo, hi = node.lo, node.hi
            lat = f"{L}[{node.latch}]" if node.latch is not None else None
            if kind in ("yesterday", "weak_yesterday"):
                lines.append(f"{t} = {lat};")
                lines.append(f"{lat} = ({a[0]}) ? 1 : 0;")
            elif kind in ("once", "historically") and lo == 0:
                op = "||" if kind == "once" else "&&"
                lines.append(f"{lat} = {lat} {op} ({a[0]});")
                lines.append(f"{t} = {lat};")
            elif kind in ("once", "historically"):
                age = f"{C}[{node.counters[0]}]"
                seen, trig = ("1", f"({a[0]})") if kind == "once" else ("0", f"!({a[0]})")
                lines.append(f"if ({lat} == {seen}) {{")
                lines.append(f"    if ({age} < {lo}UL) {age}++;")
                lines.append(f"}} else if ({trig}) {{")
                lines.append(f"    {lat} = {seen};")
                lines.append(f"    {age} = 0UL;")
                lines.append("}")
                fired = f"{lat} == {seen} && {age} >= {lo}UL"
                lines.append(f"{t} = {fired};" if kind == "once" else f"{t} = !({fired});")
            elif kind in ("once_window", "historically_window"):
                size = hi + 1
                cur, hits = (f"{C}[{i}]" for i in node.counters)
                buf = f"mon_s->m{m}_b{node.buffer}"
                hit = "1" if kind == "once_window" else "0"
                enter = "mon_new" if lo == 0 else f"{buf}[(mon_cur + {size}UL - {lo - 1}UL) % {size}UL]"
                lines.append("{")
                lines.append(f"    unsigned long mon_cur = {cur};")
                lines.append(f"    unsigned char mon_new = ({a[0]}) ? 1 : 0;")
                lines.append(f"    unsigned char mon_enter = {enter};")
                lines.append(f"    unsigned char mon_leave = {buf}[(mon_cur + 1UL) % {size}UL];")
                lines.append(f"    if (mon_enter == {hit}) {hits}++;")
                lines.append(f"    if (mon_leave == {hit}) {hits}--;")
                lines.append(f"    mon_cur = (mon_cur + 1UL) % {size}UL;")
                lines.append(f"    {buf}[mon_cur] = mon_new;")
                lines.append(f"    {cur} = mon_cur;")
                lines.append("}")
                cmp = "> 0UL" if kind == "once_window" else "== 0UL"
                lines.append(f"{t} = {hits} {cmp};")
            elif kind == "since" and lo == 0:
                lines.append(f"{lat} = ({a[1]}) || (({a[0]}) && {lat});")
                lines.append(f"{t} = {lat};")
            elif kind == "since":
                age = f"{C}[{node.counters[0]}]"
                lines.append(f"if ({lat} && ({a[0]})) {{")
                lines.append(f"    if ({age} < {lo}UL) {age}++;")
                lines.append(f"}} else if ({a[1]}) {{")
                lines.append(f"    {lat} = 1;")
                lines.append(f"    {age} = 0UL;")
                lines.append("} else {")
                lines.append(f"    {lat} = 0;")
                lines.append("}")
                lines.append(f"{t} = {lat} && {age} >= {lo}UL;")
            elif kind == "since_window":
                size = hi + 1
                none = f"{hi + 1}UL"
                cur, young, fail = (f"{C}[{i}]" for i in node.counters)
                buf = f"mon_s->m{m}_b{node.buffer}"
                enter = "mon_new" if lo == 0 else f"{buf}[(mon_cur + {size}UL - {lo - 1}UL) % {size}UL]"
                lines.append("{")
                lines.append(f"    unsigned long mon_cur = {cur};")
                lines.append(f"    unsigned char mon_new = ({a[1]}) ? 1 : 0;")
                lines.append(f"    unsigned char mon_enter = {enter};")
                lines.append(f"    if (!({a[0]})) {fail} = 0UL; else if ({fail} < {none}) {fail}++;")
                lines.append(f"    if (mon_enter) {young} = {lo}UL; else if ({young} < {none}) {young}++;")
                lines.append(f"    mon_cur = (mon_cur + 1UL) % {size}UL;")
                lines.append(f"    {buf}[mon_cur] = mon_new;")
                lines.append(f"    {cur} = mon_cur;")
                lines.append("}")
                lines.append(f"{t} = {young} <= {hi}UL && {young} <= {fail};")
            else:
                raise UnsupportedConstruct(f"plan node {kind}")
        if temps:
            lines.insert(0, f"unsigned char {', '.join(temps)};")
        return lines, exprs[-1]

    def render(self) -> str:
        bodies = [self.monitor_body(m, plan) for m, (plan, _) in enumerate(self.plans)]
        out: list[str] = []
        w = out.append
        w("/* Generated runtime monitors. Do not edit. */")
        w("")
        w(f"#define MONITOR_COUNT {len(self.monitors)}")
        w(f"#define MONITOR_SIGNAL_COUNT {len(self.signals)}")
        w("")
        w("typedef struct {")
        for name, kind in self.signals.items():
            w(f"    {'double' if kind == 'num' else 'unsigned char'} {name};")
        if not self.signals:
            w("    unsigned char mon_unused;")
        w(f"}} {INPUT_T};")
        w("")
        if self.params:
            w("/* Thresholds; patch after monitor_init to retune without regenerating. */")
            w("typedef struct {")
            for name in self.params:
                w(f"    double {name};")
            w(f"}} {PARAMS_T};")
            w("")
        w("typedef struct {")
        w("    unsigned long tick_count;")
        if self.params:
            w(f"    {PARAMS_T} params;")
        for m, (_, layout) in enumerate(self.plans):
            if layout.latch_init:
                w(f"    unsigned char m{m}_l[{len(layout.latch_init)}];")
            if layout.counter_init:
                w(f"    unsigned long m{m}_c[{len(layout.counter_init)}];")
            for j, (size, _) in enumerate(layout.buffer_specs):
                w(f"    unsigned char m{m}_b{j}[{size}];")
        w(f"}} {STATE_T};")
        w("")
        w(f"void monitor_init({STATE_T} *mon_s)")
        w("{")
        w("    unsigned long mon_i;")
        w("    mon_s->tick_count = 0UL;")
        for name, value in self.params.items():
            w(f"    mon_s->params.{name} = {c_double(value)};")
        for m, (_, layout) in enumerate(self.plans):
            for i, v in enumerate(layout.latch_init):
                w(f"    mon_s->m{m}_l[{i}] = {v};")
            for i, v in enumerate(layout.counter_init):
                w(f"    mon_s->m{m}_c[{i}] = {v}UL;")
            for j, (size, fill) in enumerate(layout.buffer_specs):
                w(f"    for (mon_i = 0UL; mon_i < {size}UL; mon_i++) mon_s->m{m}_b{j}[mon_i] = {fill};")
        w("    (void)mon_i;")
        w("}")
        w("")
        w(f"void monitor_step({STATE_T} *mon_s, const {INPUT_T} *mon_in, unsigned char *mon_v)")
        w("{")
        for name, kind in self.signals.items():
            ctype = "double" if kind == "num" else "unsigned char"
            w(f"    const {ctype} {name} = mon_in->{name};")
        if not self.signals:
            w("    (void)mon_in;")
        for m, ((req_id, f), (lines, root)) in enumerate(zip(self.monitors, bodies)):
            w("")
            w(f"    /* {req_id}: {print_formula(f)} */")
            w("    {")
            for line in lines:
                w(f"        {line}")
            if root in ("0", "1"):
                w(f"        mon_v[{m}] = {root};")
            else:
                w(f"        mon_v[{m}] = ({root}) ? 1 : 0;")
            w("    }")
        w("    mon_s->tick_count++;")
        w("}")
        return "\n".join(out) + "\n"


def emit(monitors: Monitors, *, parametric: bool = True, cap: int = BOUND_CAP) -> str:
    """Emit one C99 translation unit for ``monitors`` (pairs of id and formula).

    With ``parametric`` set, literals that came from mission parameters are read
    from ``state.params`` instead of being baked into the code.
    """
    return _Emitter(monitors, parametric, cap).render()


_HARNESS = r"""
/* ---- trace replay driver ---- */

#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#define MON_LINE_MAX 65536
#define MON_MAX_COLS 1024

static char mon_line[MON_LINE_MAX];
static char *mon_fields[MON_MAX_COLS];
static int mon_sig_col[MONITOR_SIGNAL_COUNT + 1];

static const char *const mon_ids[MONITOR_COUNT + 1] = {
%(ids)s
};

static const char *const mon_sig_names[MONITOR_SIGNAL_COUNT + 1] = {
%(sig_names)s
};

static int mon_fail(unsigned long lineno, const char *msg)
{
    fprintf(stderr, "line %%lu: %%s\n", lineno, msg);
    return 2;
}

static int mon_read_line(FILE *fp, int *too_long)
{
    size_t n;
    *too_long = 0;
    if (!fgets(mon_line, sizeof mon_line, fp)) return 0;
    n = strlen(mon_line);
    if (n > 0 && mon_line[n - 1] == '\n') {
        mon_line[--n] = '\0';
    } else if (n == sizeof mon_line - 1) {
        *too_long = 1;
    }
    if (n > 0 && mon_line[n - 1] == '\r') mon_line[--n] = '\0';
    return 1;
}

static char *mon_trim(char *s)
{
    char *end;
    while (*s == ' ' || *s == '\t') s++;
    end = s + strlen(s);
    while (end > s && (end[-1] == ' ' || end[-1] == '\t')) *--end = '\0';
    return s;
}

static int mon_split(char *line)
{
    int n = 0;
    char *p = line;
    for (;;) {
        char *comma = strchr(p, ',');
        if (n >= MON_MAX_COLS) return -1;
        if (comma) *comma = '\0';
        mon_fields[n++] = mon_trim(p);
        if (!comma) break;
        p = comma + 1;
    }
    return n;
}

static int mon_is_blank(const char *s)
{
    while (*s == ' ' || *s == '\t') s++;
    return *s == '\0';
}

static int mon_parse_double(const char *s, double *out)
{
    const char *c;
    char *end;
    if (*s == '\0') return 0;
    for (c = s; *c; c++) {
        if (!strchr("0123456789+-.eE", *c)) return 0;
    }
    *out = strtod(s, &end);
    if (*end != '\0') return 0;
    return *out - *out == 0.0;
}

int main(void)
{
    %(state_t)s st;
    %(input_t)s in;
    unsigned char verdicts[MONITOR_COUNT + 1];
    unsigned long lineno = 1, tick = 0;
    int ncols, i, too_long;

    if (!mon_read_line(stdin, &too_long)) return 0;
    if (too_long) return mon_fail(lineno, "line too long");
    ncols = mon_split(mon_line);
    if (ncols < 1 || strcmp(mon_fields[0], "time") != 0)
        return mon_fail(lineno, "header must start with 'time'");
    for (i = 0; i < MONITOR_SIGNAL_COUNT; i++) {
        int col;
        mon_sig_col[i] = -1;
        for (col = 1; col < ncols; col++) {
            if (strcmp(mon_fields[col], mon_sig_names[i]) == 0) mon_sig_col[i] = col;
        }
        if (mon_sig_col[i] < 0) {
            fprintf(stderr, "line 1: missing signal column '%%s'\n", mon_sig_names[i]);
            return 2;
        }
    }

    monitor_init(&st);
    memset(&in, 0, sizeof in);
    while (mon_read_line(stdin, &too_long)) {
        char *end;
        long t;
        lineno++;
        if (too_long) return mon_fail(lineno, "line too long");
        if (mon_is_blank(mon_line)) continue;
        if (mon_split(mon_line) != ncols) return mon_fail(lineno, "wrong number of fields");
        t = strtol(mon_fields[0], &end, 10);
        if (*mon_fields[0] == '\0' || *end != '\0' || t < 0 || (unsigned long)t != tick)
            return mon_fail(lineno, "time must count up from 0 without gaps");
%(assign)s
        monitor_step(&st, &in, verdicts);
        for (i = 0; i < MONITOR_COUNT; i++) printf("%%lu,%%s,%%d\n", tick, mon_ids[i], verdicts[i]);
        tick++;
    }
    return 0;
}
"""


def _c_string(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def emit_harness(monitors: Monitors, *, parametric: bool = True, cap: int = BOUND_CAP) -> str:
    """Emit a self-contained program: the monitors plus a CSV trace replay ``main``.

    The program reads a trace from standard input and prints ``tick,id,0|1``
    per requirement per tick. Malformed input exits with status 2.
    """
    emitter = _Emitter(monitors, parametric, cap)
    monitor_src = emitter.render()
    assign: list[str] = []
    for i, (name, kind) in enumerate(emitter.signals.items()):
        field = f"mon_fields[mon_sig_col[{i}]]"
        if kind == "bool":
            assign.append(f"        if (strcmp({field}, \"0\") == 0) in.{name} = 0;")
            assign.append(f"        else if (strcmp({field}, \"1\") == 0) in.{name} = 1;")
            assign.append(f"        else return mon_fail(lineno, \"boolean column '{name}' needs 0 or 1\");")
        else:
            assign.append(f"        if (!mon_parse_double({field}, &in.{name}))")
            assign.append(f"            return mon_fail(lineno, \"numeric column '{name}' needs a finite decimal\");")
    ids = ",\n".join([f"    {_c_string(req_id)}" for req_id, _ in emitter.monitors] + ["    0"])
    names = [f"    {_c_string(n)}" for n in emitter.signals] + ["    0"]
    return monitor_src + _HARNESS % {
        "ids": ids,
        "sig_names": ",\n".join(names),
        "state_t": STATE_T,
        "input_t": INPUT_T,
        "assign": "\n".join(assign),
    }
