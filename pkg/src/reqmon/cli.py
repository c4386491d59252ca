"""Command-line pipeline: parse -> formalize -> codegen | check | simulate, plus gen.

Exit codes: 0 no violations, 1 violations found, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .codegen import emit, emit_harness
from .errors import PositionedError, ReqmonError
from .expr import expr_text
from .formalize import formalize
from .formula import print_formula
from .fretish import Always, InMode, Never, Requirement, parse_requirements_file
from .harness import get_scenario, generate_scenario, live_reports, replay_text, verdict_table, write_trace
from .templates import builtin_catalog, generate, parse_catalog, parse_params

EXIT_OK, EXIT_VIOLATION, EXIT_ERROR = 0, 1, 2


class CliError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}") from exc


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}") from exc


def _located(path: str, exc: ReqmonError) -> CliError:
    sep = ":" if isinstance(exc, PositionedError) else ": "
    return CliError(f"{path}{sep}{exc}")


def _load_reqs(path: str) -> list[Requirement]:
    text = _read(path)
    try:
        return parse_requirements_file(text)
    except ReqmonError as exc:
        raise _located(path, exc) from exc


def _describe(req: Requirement) -> str:
    scope = f"in {req.scope.mode} mode" if isinstance(req.scope, InMode) else "-"
    cond = "-" if req.condition is None else f"{req.condition.flavor} {expr_text(req.condition.expr)}"
    if isinstance(req.timing, Always):
        timing = "always"
    elif isinstance(req.timing, Never):
        timing = "never"
    else:
        timing = f"within {req.timing.ticks} ticks"
    return "\n".join([
        req.id,
        f"  scope:     {scope}",
        f"  condition: {cond}",
        f"  component: {req.component}",
        "  shall",
        f"  timing:    {timing}",
        f"  response:  {expr_text(req.response)}",
    ])


def cmd_parse(args) -> int:
    reqs = _load_reqs(args.reqs)
    print("\n\n".join(_describe(r) for r in reqs))
    return EXIT_OK


def _formalize_all(reqs: Sequence[Requirement], path: str):
    out = []
    for r in reqs:
        try:
            out.append((r.id, formalize(r)))
        except ReqmonError as exc:
            raise _located(path, exc) from exc
    return out


def cmd_formalize(args) -> int:
    for req_id, f in _formalize_all(_load_reqs(args.reqs), args.reqs):
        print(f"{req_id}\t{print_formula(f)}")
    return EXIT_OK


def cmd_codegen(args) -> int:
    monitors = _formalize_all(_load_reqs(args.reqs), args.reqs)
    render = emit_harness if args.harness else emit
    _write(args.out, render(monitors, parametric=not args.no_params))
    return EXIT_OK


def _print_reports(reports, verbose: bool) -> int:
    for r in reports:
        print(r.record())
    for r in reports:
        if r.alert():
            print(f"ALERT {r.alert()}")
    if verbose and reports:
        print(verdict_table(reports))
    return EXIT_VIOLATION if any(r.violated for r in reports) else EXIT_OK


def cmd_check(args) -> int:
    reqs = _load_reqs(args.reqs)
    _formalize_all(reqs, args.reqs)
    text = _read(args.trace)
    try:
        reports = replay_text(text, reqs)
    except ReqmonError as exc:
        raise _located(args.trace, exc) from exc
    return _print_reports(reports, args.verbose)


def cmd_simulate(args) -> int:
    reqs = _load_reqs(args.reqs)
    _formalize_all(reqs, args.reqs)
    scenario = get_scenario(args.scenario, args.seed)
    if args.out:
        _write(args.out, write_trace(generate_scenario(scenario)))
    return _print_reports(live_reports(scenario, reqs), args.verbose)


def cmd_gen(args) -> int:
    try:
        params = parse_params(_read(args.params))
    except ReqmonError as exc:
        raise _located(args.params, exc) from exc
    catalog = builtin_catalog()
    if args.templates:
        try:
            catalog.update(parse_catalog(_read(args.templates)))
        except ReqmonError as exc:
            raise _located(args.templates, exc) from exc
    reqs = generate(params, catalog.values())
    lines = ["# generated from mission parameters"]
    lines += [f"{r.id}: {r.source_text}" for r in reqs]
    _write(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="reqmon", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("parse", help="show the field breakdown of each requirement")
    sp.add_argument("--reqs", required=True)
    sp.set_defaults(func=cmd_parse)

    sp = sub.add_parser("formalize", help="print the past-time formula of each requirement")
    sp.add_argument("--reqs", required=True)
    sp.set_defaults(func=cmd_formalize)

    sp = sub.add_parser("codegen", help="emit C99 monitor source")
    sp.add_argument("--reqs", required=True)
    sp.add_argument("--out", help="output file (default: stdout)")
    sp.add_argument("--harness", action="store_true", help="also emit a main() that replays a CSV trace from stdin")
    sp.add_argument("--no-params", action="store_true", help="bake template thresholds in as literals")
    sp.set_defaults(func=cmd_codegen)

    sp = sub.add_parser("check", help="monitor a recorded trace")
    sp.add_argument("--reqs", required=True)
    sp.add_argument("--trace", required=True)
    sp.add_argument("--verbose", action="store_true", help="print the per-tick verdict table")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("simulate", help="fly a scripted scenario with live monitoring")
    sp.add_argument("--reqs", required=True)
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", help="also write the generated trace CSV here")
    sp.add_argument("--verbose", action="store_true")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("gen", help="generate requirements from a parameter file")
    sp.add_argument("--params", required=True)
    sp.add_argument("--templates", help="YAML template catalog (extends the built-in one)")
    sp.add_argument("--out", help="output .frt file (default: stdout)")
    sp.set_defaults(func=cmd_gen)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"reqmon: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ReqmonError as exc:
        print(f"reqmon: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
