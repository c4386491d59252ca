"""Requirements-based runtime monitoring: structured requirements to past-time monitors."""

from .codegen import emit, emit_harness
from .engine import NO_MAJORITY, CompiledMonitor, compile_monitor, majority
from .formalize import formalize
from .formula import free_signals, print_formula
from .fretish import parse_requirement, parse_requirements_file, print_requirement, tokenize
from .semantics import Trace, eval_expr, eval_formula, verdict_stream

__all__ = [
    "NO_MAJORITY",
    "CompiledMonitor",
    "Trace",
    "compile_monitor",
    "emit",
    "emit_harness",
    "eval_expr",
    "eval_formula",
    "formalize",
    "free_signals",
    "majority",
    "parse_requirement",
    "parse_requirements_file",
    "print_formula",
    "print_requirement",
    "tokenize",
    "verdict_stream",
]
