"""Requirements generated from mission parameter files.

A template is a requirement sentence with ``{PLACEHOLDER}`` holes where
numeric literals go, plus a table saying which parameter fills each hole.
Instantiated literals remember their parameter name, so the C emitter can
expose them as patchable thresholds.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import yaml

from .errors import DuplicateKey, MissingParam, ParamSyntaxError, ReqmonError, TemplateError
from .expr import Neg, NumLit, format_number
from .fretish import Requirement, Token, parse_requirement

_PARAM_LINE = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*?)\s*$")
_NUMBER = re.compile(r"[+-]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?")
_HOLE = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")


@dataclass(frozen=True)
class ParamFile:
    entries: dict[str, float] = field(default_factory=dict)

    def __getitem__(self, key: str) -> float:
        return self.entries[key]

    def __contains__(self, key: object) -> bool:
        return key in self.entries

    def __len__(self) -> int:
        return len(self.entries)


def parse_params(text: str) -> ParamFile:
    """Parse ``NAME = number`` lines; ``#`` starts a comment."""
    entries: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _PARAM_LINE.fullmatch(line)
        if not m:
            raise ParamSyntaxError(lineno, f"expected 'NAME = number', got {raw.strip()!r}")
        name, value_text = m.groups()
        if not _NUMBER.fullmatch(value_text):
            raise ParamSyntaxError(lineno, f"{name}: {value_text!r} is not a decimal number")
        value = float(value_text)
        if not math.isfinite(value):
            raise ParamSyntaxError(lineno, f"{name}: value out of range")
        if name in entries:
            raise DuplicateKey(name, lineno)
        entries[name] = value
    return ParamFile(entries)


@dataclass(frozen=True)
class Template:
    name: str
    skeleton: str
    params: Mapping[str, str]  # placeholder -> parameter key
    doc: str = ""

    def __post_init__(self) -> None:
        holes = set(self.placeholders)
        if holes != set(self.params):
            raise TemplateError(
                f"template {self.name}: placeholders {sorted(holes)} do not match "
                f"parameter table {sorted(self.params)}"
            )
        # A hole must sit where a numeric literal may; parsing with a stand-in proves it.
        try:
            parse_requirement(self.skeleton, self.req_id, resolve=lambda tok: NumLit(1.0))
        except ReqmonError as exc:
            raise TemplateError(f"template {self.name}: {exc}") from exc

    @property
    def placeholders(self) -> list[str]:
        seen: list[str] = []
        for hole in _HOLE.findall(self.skeleton):
            if hole not in seen:
                seen.append(hole)
        return seen

    @property
    def req_id(self) -> str:
        return f"AUTO-{self.name}"

    def keys(self) -> list[str]:
        return [self.params[p] for p in self.placeholders]


def instantiate(template: Template, params: ParamFile) -> Requirement:
    for hole in template.placeholders:
        key = template.params[hole]
        if key not in params:
            raise MissingParam(hole, key)

    def resolve(tok: Token):
        key = template.params[tok.text]
        value = params[key]
        if value < 0:
            # Printed as "-x", which reads back as a negation; keep that shape.
            return Neg(NumLit(-value))
        return NumLit(value, param=key)

    text = _HOLE.sub(lambda m: format_number(params[template.params[m.group(1)]]), template.skeleton)
    req = parse_requirement(template.skeleton, template.req_id, resolve=resolve)
    return Requirement(req.id, req.scope, req.condition, req.component, req.timing, req.response, text)


BUILTIN_TEMPLATES = (
    Template(
        "altitude-ceiling",
        "in flight_mode the aircraft shall always satisfy altitude < {MAX_ALT}",
        {"MAX_ALT": "MAX_ALT"},
        "Stay below the configured altitude ceiling while flying.",
    ),
    Template(
        "daa-separation",
        "in flight_mode the aircraft shall always satisfy "
        "horizontal_intruder_distance > {DAA_HDIST} | vertical_intruder_distance > {DAA_VDIST}",
        {"DAA_HDIST": "DAA_HDIST", "DAA_VDIST": "DAA_VDIST"},
        "Keep horizontal or vertical separation from intruders above the DAA thresholds.",
    ),
    Template(
        "geofence-containment",
        "in flight_mode the aircraft shall always satisfy horizontal_fence_distance > {GEOFENCE_BUFFER}",
        {"GEOFENCE_BUFFER": "GEOFENCE_BUFFER"},
        "Keep a positive horizontal margin to the geofence boundary.",
    ),
)


def builtin_catalog() -> dict[str, Template]:
    return {t.name: t for t in BUILTIN_TEMPLATES}


def parse_catalog(text: str) -> dict[str, Template]:
    """Read a YAML template catalog::

        templates:
          altitude-ceiling:
            skeleton: "in flight_mode the aircraft shall always satisfy altitude < {MAX_ALT}"
            params: {MAX_ALT: MAX_ALT}
            doc: optional prose
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise TemplateError(f"catalog is not valid YAML: {exc}") from exc
    if not isinstance(data, dict) or not isinstance(data.get("templates"), dict):
        raise TemplateError("catalog needs a top-level 'templates' mapping")
    catalog: dict[str, Template] = {}
    for name, body in data["templates"].items():
        if not isinstance(body, dict) or not isinstance(body.get("skeleton"), str):
            raise TemplateError(f"template {name}: needs a 'skeleton' string")
        table = body.get("params") or {}
        if not isinstance(table, dict):
            raise TemplateError(f"template {name}: 'params' must map placeholder to parameter key")
        catalog[str(name)] = Template(
            str(name), body["skeleton"], {str(k): str(v) for k, v in table.items()}, str(body.get("doc", ""))
        )
    return catalog


def generate(params: ParamFile, catalog: Iterable[Template]) -> list[Requirement]:
    """Instantiate every template whose parameters appear in ``params``.

    Templates with none of their keys set are skipped; a partial match is an
    error, since it usually means a typo in the parameter file.
    """
    reqs = []
    for template in catalog:
        present = [k for k in template.keys() if k in params]
        if not present:
            continue
        reqs.append(instantiate(template, params))
    return reqs
