import random
import re

import pytest

from corpus import (
    NUMERIC_ATOMS,
    P,
    c_compiler,
    compile_c,
    parse_c_verdicts,
    random_formula,
    random_mixed_trace,
    run_c,
)
from reqmon.codegen import emit, emit_harness
from reqmon.engine import compile_monitor
from reqmon.errors import BoundTooLarge, ReqmonError
from reqmon.expr import SignalRef
from reqmon.formalize import formalize
from reqmon.formula import TRUE, Atom, Historically, Once, Since
from reqmon.fretish import parse_requirement
from reqmon.harness import write_trace
from reqmon.templates import BUILTIN_TEMPLATES, instantiate, parse_params

REQ1_SRC = (
    "in flight_mode the aircraft shall always satisfy "
    "horizontal_intruder_distance > 250 | vertical_intruder_distance > 50"
)
REQ1 = formalize(parse_requirement(REQ1_SRC))
DAA_CSV = "time,flight_mode,horizontal_intruder_distance,vertical_intruder_distance\n" \
    "0,0,0,0\n1,1,300,10\n2,1,200,10\n3,1,300,10\n"
HEAP = re.compile(r"\b(malloc|calloc|realloc|free)\b")

needs_cc = pytest.mark.skipif(c_compiler() is None, reason="no C compiler available")


class TestText:
    def test_requirement_one_guard(self):
        src = emit([("REQ-1", REQ1)])
        assert ("(flight_mode) ? ((horizontal_intruder_distance > 250.0) || "
                "(vertical_intruder_distance > 50.0)) : 1") in src

    def test_contract_names(self):
        src = emit([("REQ-1", REQ1)])
        assert "void monitor_init(monitor_state_t *mon_s)" in src
        assert ("void monitor_step(monitor_state_t *mon_s, const monitor_input_t *mon_in, "
                "unsigned char *mon_v)") in src
        assert "unsigned char flight_mode;" in src
        assert "double horizontal_intruder_distance;" in src

    def test_constant_verdict(self):
        src = emit([("T", TRUE)])
        body = src[src.index("void monitor_step"):]
        assert "mon_v[0] = 1;" in body

    def test_once_exact_ring(self):
        src = emit([("A", Once(P, 2, 2))])
        assert "unsigned char m0_b0[3];" in src
        assert "m0_c[0]" in src  # ring cursor

    def test_no_heap_identifiers(self):
        rng = random.Random(4)
        monitors = [(f"M{i}", random_formula(rng, 6, NUMERIC_ATOMS)) for i in range(40)]
        assert not HEAP.search(emit(monitors))
        assert not HEAP.search(emit_harness(monitors))

    def test_monitor_part_has_no_includes(self):
        assert "#include" not in emit([("REQ-1", REQ1)])

    def test_deterministic(self):
        rng = random.Random(8)
        monitors = [(f"M{i}", random_formula(rng, 5, NUMERIC_ATOMS)) for i in range(10)]
        assert emit(monitors) == emit(list(monitors))
        assert emit_harness(monitors) == emit_harness(monitors)

    def test_bound_cap(self):
        with pytest.raises(BoundTooLarge):
            emit([("A", Once(P, 0, 70_000))])

    def test_rejects_reserved_names(self):
        with pytest.raises(ReqmonError):
            emit([("A", Atom(SignalRef("int")))])

    def test_parameter_table(self):
        params = parse_params("DAA_HDIST = 250\nDAA_VDIST = 50\n")
        daa = next(t for t in BUILTIN_TEMPLATES if t.name == "daa-separation")
        f = formalize(instantiate(daa, params))
        src = emit([("AUTO", f)])
        assert "double DAA_HDIST;" in src
        assert "mon_s->params.DAA_HDIST = 250.0;" in src
        assert "horizontal_intruder_distance > mon_s->params.DAA_HDIST" in src
        baked = emit([("AUTO", f)], parametric=False)
        assert "params" not in baked
        assert "horizontal_intruder_distance > 250.0" in baked


@needs_cc
class TestCompiled:
    def test_requirement_one(self, tmp_path):
        exe = compile_c(emit_harness([("REQ-1", REQ1)]), tmp_path)
        proc = run_c(exe, DAA_CSV)
        assert proc.returncode == 0, proc.stderr
        assert proc.stdout == "0,REQ-1,1\n1,REQ-1,1\n2,REQ-1,0\n3,REQ-1,0\n"

    def test_empty_input(self, tmp_path):
        exe = compile_c(emit_harness([("REQ-1", REQ1)]), tmp_path)
        proc = run_c(exe, "")
        assert (proc.returncode, proc.stdout) == (0, "")

    @pytest.mark.parametrize("bad", [
        DAA_CSV + "4,1,300\n",
        DAA_CSV + "4,2,300,10\n",
        DAA_CSV + "4,1,abc,10\n",
        DAA_CSV + "7,1,300,10\n",
        "time,flight_mode\n0,1\n",
    ], ids=["short-row", "bad-bool", "bad-number", "time-gap", "missing-column"])
    def test_malformed(self, tmp_path, bad):
        exe = compile_c(emit_harness([("REQ-1", REQ1)]), tmp_path)
        proc = run_c(exe, bad)
        assert proc.returncode == 2
        assert proc.stderr.strip()

    def test_parametric_and_baked_agree(self, tmp_path):
        params = parse_params("DAA_HDIST = 250\nDAA_VDIST = 50\n")
        daa = next(t for t in BUILTIN_TEMPLATES if t.name == "daa-separation")
        f = formalize(instantiate(daa, params))
        a = run_c(compile_c(emit_harness([("R", f)]), tmp_path, "a"), DAA_CSV).stdout
        b = run_c(compile_c(emit_harness([("R", f)], parametric=False), tmp_path, "b"), DAA_CSV).stdout
        assert a == b == "0,R,1\n1,R,1\n2,R,0\n3,R,0\n"

    def test_differential(self, tmp_path):
        rng = random.Random(2024)
        formulas = [random_formula(rng, 6, NUMERIC_ATOMS) for _ in range(60)]
        formulas.append(Historically(Since(P, Atom(SignalRef("q")), 2, 9), 1, 30))
        monitors = [(f"M{i}", f) for i, f in enumerate(formulas)]
        exe = compile_c(emit_harness(monitors), tmp_path)
        pairs = 0
        for _ in range(3):
            tr = random_mixed_trace(rng, rng.randint(1, 200))
            proc = run_c(exe, write_trace(tr))
            assert proc.returncode == 0, proc.stderr
            got = parse_c_verdicts(proc.stdout)
            rows = [tr.row(t) for t in range(tr.length)]
            for mid, f in monitors:
                assert got[mid] == compile_monitor(f).run(rows), (mid, f)
                pairs += 1
        assert pairs >= 100
