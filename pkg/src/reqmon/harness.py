"""Simulated flight system: telemetry bus, monitor node, trace replay, DAA scenarios.

The bus is synchronous and single-rate: every advertised topic is published
exactly once per tick, and tick ``t + 1`` starts only after every subscriber
has handled tick ``t``. One tick is one second of model time; distances are
in feet on a flat earth.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .engine import CompiledMonitor, compile_monitor
from .errors import MissingSignal, ReqmonError, TraceFormatError, TypeMismatch
from .expr import format_number
from .formalize import formalize
from .formula import signal_types
from .fretish import IDENT_RE, Requirement
from .semantics import Trace, Value, check_signals, value_kind

_NUMBER = re.compile(r"[+-]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?")


# ---------------------------------------------------------------------------
# trace files


def read_trace(text: str, types: Mapping[str, str] | None = None) -> Trace:
    """Parse a trace CSV (``time,<signal>...``, gapless ticks from 0).

    Columns listed as "bool" in ``types`` must hold 0/1; all others are read
    as finite decimals.
    """
    types = types or {}
    lines = text.splitlines()
    header_at = next((i for i, line in enumerate(lines) if line.strip()), None)
    if header_at is None:
        return Trace()
    header = [h.strip() for h in lines[header_at].split(",")]
    if header[0] != "time":
        raise TraceFormatError(header_at + 1, "header must start with 'time'")
    names = header[1:]
    for name in names:
        if not IDENT_RE.match(name):
            raise TraceFormatError(header_at + 1, f"bad signal name {name!r}")
    if len(set(names)) != len(names):
        raise TraceFormatError(header_at + 1, "duplicate column in header")

    columns: dict[str, list[Value]] = {name: [] for name in names}
    tick = 0
    for i in range(header_at + 1, len(lines)):
        lineno = i + 1
        if not lines[i].strip():
            continue
        fields = [f.strip() for f in lines[i].split(",")]
        if len(fields) != len(header):
            raise TraceFormatError(lineno, f"expected {len(header)} fields, found {len(fields)}")
        if not fields[0].isdigit() or int(fields[0]) != tick:
            raise TraceFormatError(lineno, f"time must be {tick} (gapless from 0), found {fields[0]!r}")
        for name, text_value in zip(names, fields[1:]):
            if types.get(name) == "bool":
                if text_value not in ("0", "1"):
                    raise TraceFormatError(lineno, f"boolean column {name!r} needs 0 or 1, found {text_value!r}")
                columns[name].append(text_value == "1")
            else:
                if not _NUMBER.fullmatch(text_value):
                    raise TraceFormatError(lineno, f"column {name!r}: {text_value!r} is not a decimal number")
                value = float(text_value)
                if not math.isfinite(value):
                    raise TraceFormatError(lineno, f"column {name!r}: value out of range")
                columns[name].append(value)
        tick += 1
    return Trace(columns, tick)


def _cell(v: Value) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    return format_number(v)


def write_trace(trace: Trace) -> str:
    names = list(trace.columns)
    out = [",".join(["time", *names])]
    for t in range(trace.length):
        out.append(",".join([str(t), *(_cell(trace.columns[n][t]) for n in names)]))
    return "\n".join(out) + "\n"


def requirement_signal_types(formulas: Iterable) -> dict[str, str]:
    types: dict[str, str] = {}
    for f in formulas:
        for name, kind in signal_types(f).items():
            prev = types.setdefault(name, kind)
            if prev != kind:
                raise TypeMismatch(name, prev, kind)
    return types


# ---------------------------------------------------------------------------
# reports


@dataclass
class ViolationReport:
    requirement_id: str
    verdicts: list[bool]
    first_violation_tick: int | None = None
    offending_values: dict[str, Value] = field(default_factory=dict)

    @property
    def trace_length(self) -> int:
        return len(self.verdicts)

    @property
    def violated(self) -> bool:
        return self.first_violation_tick is not None

    def record(self) -> str:
        first = "-" if self.first_violation_tick is None else str(self.first_violation_tick)
        return f"id={self.requirement_id} first_violation_tick={first} length={self.trace_length}"

    def alert(self) -> str | None:
        if self.first_violation_tick is None:
            return None
        values = " ".join(f"{k}={_cell(v)}" for k, v in self.offending_values.items())
        return f"{self.requirement_id} first violation at tick {self.first_violation_tick}: {values}"


def build_report(req_id: str, verdicts: Sequence[bool], rows: Sequence[Mapping[str, Value]]) -> ViolationReport:
    first = next((t for t, ok in enumerate(verdicts) if not ok), None)
    offending = {} if first is None else dict(rows[first])
    return ViolationReport(req_id, list(verdicts), first, offending)


def verdict_table(reports: Sequence[ViolationReport]) -> str:
    ids = [r.requirement_id for r in reports]
    length = max((r.trace_length for r in reports), default=0)
    widths = [max(len(i), 1) for i in ids]
    lines = ["tick  " + "  ".join(i.rjust(w) for i, w in zip(ids, widths))]
    for t in range(length):
        cells = ("T" if r.verdicts[t] else "F" for r in reports)
        lines.append(f"{t:>4}  " + "  ".join(c.rjust(w) for c, w in zip(cells, widths)))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# replay


def _compile_all(requirements: Sequence[Requirement]) -> list[CompiledMonitor]:
    return [compile_monitor(formalize(r), r.id) for r in requirements]


def replay(trace: Trace, requirements: Sequence[Requirement]) -> list[ViolationReport]:
    """Run every requirement's monitor over ``trace``, tick by tick."""
    monitors = _compile_all(requirements)
    for mon in monitors:
        check_signals(mon.formula, trace)
    rows = [trace.row(t) for t in range(trace.length)]
    reports = []
    for mon in monitors:
        verdicts = [mon.step(row) for row in rows]
        reports.append(build_report(mon.requirement_id, verdicts, rows))
    return reports


def replay_text(trace_text: str, requirements: Sequence[Requirement]) -> list[ViolationReport]:
    types = requirement_signal_types(formalize(r) for r in requirements)
    return replay(read_trace(trace_text, types), requirements)


# ---------------------------------------------------------------------------
# publish/subscribe bus


@dataclass(frozen=True)
class Topic:
    name: str
    kind: str  # "bool" | "num"


@dataclass(frozen=True)
class BusTick:
    tick: int
    published: dict[str, Value]


Handler = Callable[[int, dict[str, Value]], Mapping[str, Value] | None]


class BusError(ReqmonError):
    pass


class Bus:
    """Synchronous bus: sensors publish, then subscribers run in registration order.

    Subscribers may answer with values for topics they advertised; those are
    part of the same tick.
    """

    def __init__(self) -> None:
        self.topics: dict[str, Topic] = {}
        self._subs: list[tuple[tuple[str, ...], Handler]] = []
        self.tick = 0

    def advertise(self, name: str, kind: str) -> Topic:
        if name in self.topics:
            raise BusError(f"topic {name!r} already advertised")
        topic = Topic(name, kind)
        self.topics[name] = topic
        return topic

    def subscribe(self, topics: Iterable[str], handler: Handler) -> None:
        topics = tuple(topics)
        for name in topics:
            if name not in self.topics:
                raise MissingSignal(name)
        self._subs.append((topics, handler))

    def publish_tick(self, samples: Mapping[str, Value]) -> BusTick:
        published: dict[str, Value] = {}
        for name, value in samples.items():
            topic = self.topics.get(name)
            if topic is None:
                raise BusError(f"tick {self.tick}: publish to unknown topic {name!r}")
            if value_kind(value) != topic.kind:
                raise TypeMismatch(name, topic.kind, value_kind(value))
            published[name] = value
        for topics, handler in self._subs:
            absent = [name for name in topics if name not in published]
            if absent:
                raise BusError(f"tick {self.tick}: topics not published: {absent}")
            view = {name: published[name] for name in topics}
            for name, value in (handler(self.tick, view) or {}).items():
                if name not in self.topics:
                    raise BusError(f"tick {self.tick}: handler published unknown topic {name!r}")
                if name in published:
                    raise BusError(f"tick {self.tick}: topic {name!r} published twice")
                published[name] = value
        missing = set(self.topics) - set(published)
        if missing:
            raise BusError(f"tick {self.tick}: topics not published: {sorted(missing)}")
        frame = BusTick(self.tick, published)
        self.tick += 1
        return frame


def verdict_topic(req_id: str) -> str:
    return f"verdict/{req_id}"


class MonitorNode:
    """Subscribes to the signals its requirements mention and publishes one verdict topic each."""

    def __init__(self, bus: Bus, requirements: Sequence[Requirement]):
        self.monitors = _compile_all(requirements)
        needed: dict[str, str] = {}
        for mon in self.monitors:
            for name, kind in mon.signal_types.items():
                topic = bus.topics.get(name)
                if topic is None:
                    raise MissingSignal(name)
                if topic.kind != kind:
                    raise TypeMismatch(name, kind, topic.kind)
                needed[name] = kind
        for mon in self.monitors:
            bus.advertise(verdict_topic(mon.requirement_id), "bool")
        bus.subscribe(sorted(needed), self.on_tick)

    def on_tick(self, tick: int, values: dict[str, Value]) -> dict[str, Value]:
        return {verdict_topic(m.requirement_id): m.step(values) for m in self.monitors}


# ---------------------------------------------------------------------------
# scenarios


@dataclass(frozen=True)
class Track:
    """Straight-line kinematics: position in ft, velocity in ft per tick."""

    x: float = 0.0
    y: float = 0.0
    alt: float = 0.0
    vx: float = 0.0
    vy: float = 0.0
    vz: float = 0.0

    def at(self, t: int) -> tuple[float, float, float]:
        return self.x + self.vx * t, self.y + self.vy * t, self.alt + self.vz * t


@dataclass(frozen=True)
class Scenario:
    name: str
    duration: int
    own: Track
    intruder: Track
    takeoff_tick: int | None = 0  # None: never leaves the ground
    seed: int = 0
    noise_ft: float = 0.0  # std dev of Gaussian sensor noise on intruder distances

    def __post_init__(self) -> None:
        if self.duration < 1:
            raise ValueError("scenario duration must be at least 1 tick")


SCENARIO_SIGNALS = ("flight_mode", "horizontal_intruder_distance", "vertical_intruder_distance", "altitude")


def generate_scenario(s: Scenario) -> Trace:
    rng = random.Random(s.seed)
    cols: dict[str, list[Value]] = {name: [] for name in SCENARIO_SIGNALS}
    for t in range(s.duration):
        ox, oy, oalt = s.own.at(t)
        ix, iy, ialt = s.intruder.at(t)
        horizontal = math.hypot(ix - ox, iy - oy)
        vertical = abs(ialt - oalt)
        if s.noise_ft:
            horizontal = max(0.0, horizontal + rng.gauss(0.0, s.noise_ft))
            vertical = abs(vertical + rng.gauss(0.0, s.noise_ft))
        cols["flight_mode"].append(s.takeoff_tick is not None and t >= s.takeoff_tick)
        cols["horizontal_intruder_distance"].append(horizontal)
        cols["vertical_intruder_distance"].append(vertical)
        cols["altitude"].append(oalt)
    return Trace(cols, s.duration)


SCENARIOS: dict[str, Scenario] = {
    s.name: s
    for s in (
        # Intruder ahead on the same heading, pulling away.
        Scenario("separating", 60, Track(alt=1000, vx=50), Track(x=400, alt=1000, vx=80), takeoff_tick=2),
        # Near head-on, 100 ft lateral offset: horizontal separation drops below 250 ft.
        Scenario("converging", 60, Track(alt=1000, vx=50), Track(x=3000, y=100, alt=1000, vx=-50), takeoff_tick=5),
        # Same geometry, aircraft never in flight mode.
        Scenario("mode-off", 60, Track(alt=1000, vx=50), Track(x=3000, y=100, alt=1000, vx=-50), takeoff_tick=None),
        Scenario("head-on", 20, Track(vx=50), Track(x=1000, vx=-50)),
        # Steady climb through a 400 ft ceiling, intruder far away.
        Scenario("climb", 80, Track(vx=60, vz=7), Track(x=20000, y=20000, alt=5000), takeoff_tick=0),
        Scenario(
            "noisy-encounter", 60, Track(alt=1000, vx=50), Track(x=3000, y=300, alt=1040, vx=-50),
            takeoff_tick=0, seed=7, noise_ft=25.0,
        ),
    )
}


def get_scenario(name: str, seed: int | None = None) -> Scenario:
    try:
        s = SCENARIOS[name]
    except KeyError:
        raise ReqmonError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}") from None
    return s if seed is None else replace(s, seed=seed)


# ---------------------------------------------------------------------------
# live monitoring


def run_live(scenario: Scenario, requirements: Sequence[Requirement]) -> Iterator[tuple[BusTick, dict[str, bool]]]:
    """Publish the scenario tick by tick and yield each bus frame with the verdicts.

    Wiring errors (missing or mistyped signals) are raised here, before the
    first tick is published.
    """
    trace = generate_scenario(scenario)
    bus = Bus()
    for name in trace.columns:
        bus.advertise(name, trace.kind(name))
    node = MonitorNode(bus, requirements)
    ids = [m.requirement_id for m in node.monitors]

    def frames() -> Iterator[tuple[BusTick, dict[str, bool]]]:
        for t in range(trace.length):
            frame = bus.publish_tick(trace.row(t))
            yield frame, {i: frame.published[verdict_topic(i)] for i in ids}

    return frames()


def live_reports(scenario: Scenario, requirements: Sequence[Requirement]) -> list[ViolationReport]:
    rows: list[dict[str, Value]] = []
    verdicts: dict[str, list[bool]] = {r.id: [] for r in requirements}
    for frame, vs in run_live(scenario, requirements):
        rows.append({k: v for k, v in frame.published.items() if not k.startswith("verdict/")})
        for req_id, ok in vs.items():
            verdicts[req_id].append(ok)
    return [build_report(r.id, verdicts[r.id], rows) for r in requirements]
