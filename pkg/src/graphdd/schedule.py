"""Devices, scheduled circuits, idle windows and their JSON encoding.

Times are integer ticks (``dt``) at the file boundary.  Inside the solver
every time is an exact :class:`fractions.Fraction`; a circuit produced in
exact mode may therefore carry rational start times, which are written to
JSON as ``"p/q"`` strings.
"""
from __future__ import annotations

import json
from collections import defaultdict
from copy import copy
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Optional, Sequence, Union

Time = Union[int, Fraction]

KINDS = ("gate", "delay", "measure", "barrier")

#: Name given to every inserted decoupling gate.  The residual oracle relies
#: on it to tell embedded X gates apart from logical ones.
DD_GATE_NAME = "x_dd"


class ScheduleError(ValueError):
    """Raised for malformed devices or circuits."""


class CollisionError(ScheduleError):
    """An inserted gate would overlap an existing instruction."""


def as_time(value) -> Time:
    """Normalise an int / Fraction / ``"p/q"`` string to an exact time."""
    if isinstance(value, bool):
        raise ScheduleError(f"invalid time value {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else value
    if isinstance(value, str):
        try:
            return as_time(Fraction(value))
        except (ValueError, ZeroDivisionError) as exc:
            raise ScheduleError(f"invalid time value {value!r}") from exc
    if isinstance(value, float) and value.is_integer():
        return int(value)
    raise ScheduleError(f"invalid time value {value!r}")


def _time_to_json(value: Time):
    value = as_time(value)
    return value if isinstance(value, int) else f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class DeviceModel:
    num_qubits: int
    coupling: frozenset
    granularity: int = 1
    x_gate_duration: int = 0
    max_idle: int = 10_000
    t2: Optional[tuple] = None

    def __post_init__(self):
        pairs = set()
        for pair in self.coupling:
            a, b = pair
            if a == b:
                raise ScheduleError(f"self-coupling on qubit {a}")
            if not (0 <= a < self.num_qubits and 0 <= b < self.num_qubits):
                raise ScheduleError(f"coupling {pair} references an invalid qubit")
            pairs.add((min(a, b), max(a, b)))
        object.__setattr__(self, "coupling", frozenset(pairs))
        if self.num_qubits < 0:
            raise ScheduleError("num_qubits must be non-negative")
        if self.granularity < 1:
            raise ScheduleError("granularity must be >= 1")
        if self.x_gate_duration < 0:
            raise ScheduleError("x_gate_duration must be >= 0")
        if self.max_idle <= 2 * self.x_gate_duration:
            raise ScheduleError("max_idle must exceed 2 * x_gate_duration")
        if self.t2 is not None:
            object.__setattr__(self, "t2", tuple(self.t2))
            if len(self.t2) != self.num_qubits:
                raise ScheduleError("t2 must list one value per qubit")

    @cached_property
    def neighbors(self) -> dict:
        adj = defaultdict(list)
        for a, b in sorted(self.coupling):
            adj[a].append(b)
            adj[b].append(a)
        return {q: tuple(sorted(adj[q])) for q in range(self.num_qubits)}

    def coupled(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.coupling

    def min_idle(self, exact: bool = False) -> Time:
        """Shortest idle that can hold two gates (0 in exact mode)."""
        if exact:
            return 0
        return 2 * self.x_gate_duration + 2 * self.granularity


@dataclass(frozen=True)
class Instruction:
    kind: str
    qubits: tuple
    start: Time
    duration: Time
    name: Optional[str] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ScheduleError(f"unknown instruction kind {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(self.qubits))
        object.__setattr__(self, "start", as_time(self.start))
        object.__setattr__(self, "duration", as_time(self.duration))
        if self.start < 0 or self.duration < 0:
            raise ScheduleError("start and duration must be non-negative")
        if self.kind in ("gate", "measure") and self.duration == 0 and self.name != DD_GATE_NAME:
            raise ScheduleError(f"{self.kind} {self.name or ''} must have positive duration")
        if self.kind == "gate" and not self.name:
            raise ScheduleError("gates need a name")

    @property
    def end(self) -> Time:
        return self.start + self.duration

    @property
    def is_dd(self) -> bool:
        return self.kind == "gate" and self.name == DD_GATE_NAME


def _sort_key(inst: Instruction):
    return (inst.start, inst.qubits)


@dataclass(frozen=True)
class ScheduledCircuit:
    num_qubits: int
    instructions: tuple = ()
    device: str = ""

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(sorted(self.instructions, key=_sort_key)))

    def on_qubit(self, qubit: int) -> list:
        return [inst for inst in self.instructions if qubit in inst.qubits]

    def by_qubit(self) -> dict:
        out = {q: [] for q in range(self.num_qubits)}
        for inst in self.instructions:
            for q in inst.qubits:
                out[q].append(inst)
        return out

    @property
    def dd_gate_count(self) -> int:
        return sum(1 for inst in self.instructions if inst.is_dd)


@dataclass(frozen=True)
class IdleWindow:
    """One idle interval on one qubit; a node of the DD graph.

    ``gates`` holds the instantaneous flip times chosen by the solver, or,
    once quantized, the start ticks of the X instructions to insert.
    """

    id: int
    qubit: int
    start: Time
    end: Time
    gates: tuple = ()
    origin: tuple = field(default=(None, 0))

    def __post_init__(self):
        object.__setattr__(self, "start", as_time(self.start))
        object.__setattr__(self, "end", as_time(self.end))
        object.__setattr__(self, "gates", tuple(as_time(g) for g in self.gates))
        if self.end <= self.start:
            raise ScheduleError(f"idle window {self.id} is empty")

    @property
    def duration(self) -> Time:
        return as_time(Fraction(self.end) - self.start)

    def with_gates(self, gates: Iterable) -> "IdleWindow":
        out = copy(self)
        object.__setattr__(out, "gates", tuple(as_time(g) for g in gates))
        return out

    def overlap(self, other: "IdleWindow"):
        lo, hi = max(self.start, other.start), min(self.end, other.end)
        return (lo, hi) if hi > lo else None


# -- parsing / serialisation -------------------------------------------------


def _load(data):
    if isinstance(data, (bytes, bytearray)):
        data = data.decode()
    if isinstance(data, str):
        try:
            return json.loads(data)
        except json.JSONDecodeError as exc:
            raise ScheduleError(f"malformed JSON: {exc}") from exc
    return data


def _int_field(obj: dict, key: str, default=None) -> int:
    value = obj.get(key, default)
    if value is None:
        raise ScheduleError(f"missing field {key!r}")
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScheduleError(f"field {key!r} must be an integer")
    return value


def parse_device(data) -> DeviceModel:
    obj = _load(data)
    if not isinstance(obj, dict):
        raise ScheduleError("device must be a JSON object")
    couplings = obj.get("couplings", [])
    pairs = []
    for pair in couplings:
        if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(q, int) for q in pair)):
            raise ScheduleError(f"invalid coupling pair {pair!r}")
        key = (min(pair), max(pair))
        if key in pairs:
            raise ScheduleError(f"duplicate coupling {pair!r}")
        pairs.append(key)
    t2 = obj.get("t2")
    return DeviceModel(
        num_qubits=_int_field(obj, "num_qubits"),
        coupling=frozenset(pairs),
        granularity=_int_field(obj, "granularity", 1),
        x_gate_duration=_int_field(obj, "x_gate_duration", 0),
        max_idle=_int_field(obj, "max_idle", 10_000),
        t2=tuple(t2) if t2 is not None else None,
    )


def device_to_dict(device: DeviceModel) -> dict:
    out = {
        "num_qubits": device.num_qubits,
        "couplings": [list(p) for p in sorted(device.coupling)],
        "granularity": device.granularity,
        "x_gate_duration": device.x_gate_duration,
        "max_idle": device.max_idle,
    }
    if device.t2 is not None:
        out["t2"] = list(device.t2)
    return out


def serialize_device(device: DeviceModel) -> bytes:
    return json.dumps(device_to_dict(device), indent=2).encode()


def parse_circuit(data, device: Optional[DeviceModel] = None) -> ScheduledCircuit:
    """Decode circuit JSON and validate it (against ``device`` when given)."""
    from .validation import check_circuit

    obj = _load(data)
    if not isinstance(obj, dict):
        raise ScheduleError("circuit must be a JSON object")
    instructions = []
    for raw in obj.get("instructions", []):
        try:
            instructions.append(
                Instruction(
                    kind=raw["kind"],
                    qubits=tuple(raw["qubits"]),
                    start=raw["start"],
                    duration=raw["duration"],
                    name=raw.get("name"),
                )
            )
        except (KeyError, TypeError) as exc:
            raise ScheduleError(f"malformed instruction {raw!r}") from exc
    circuit = ScheduledCircuit(
        num_qubits=_int_field(obj, "num_qubits"),
        instructions=tuple(instructions),
        device=str(obj.get("device", "")),
    )
    return check_circuit(circuit, device)


def circuit_to_dict(circuit: ScheduledCircuit) -> dict:
    rows = []
    for inst in circuit.instructions:
        row = {"kind": inst.kind}
        if inst.kind == "gate":
            row["name"] = inst.name
        row["qubits"] = list(inst.qubits)
        row["start"] = _time_to_json(inst.start)
        row["duration"] = _time_to_json(inst.duration)
        rows.append(row)
    return {"device": circuit.device, "num_qubits": circuit.num_qubits, "instructions": rows}


def serialize_circuit(circuit: ScheduledCircuit) -> bytes:
    return json.dumps(circuit_to_dict(circuit), indent=1).encode()


# -- idle extraction -----------------------------------------------------------


def find_gaps(circuit: ScheduledCircuit, dd_transparent: bool = False) -> list:
    """All positive-length gaps as ``(qubit, start, end)``, sorted by (start, qubit).

    A qubit's gaps lie between the end of its first non-delay instruction and
    the start of its final measurement (or of its last instruction when it is
    never measured).  Delays are transparent, barriers cut gaps.  With
    ``dd_transparent`` already-embedded DD gates are treated as idle time too.
    """
    gaps = []
    for q, insts in circuit.by_qubit().items():
        busy = []
        cuts = []
        for inst in insts:
            if inst.kind == "delay" or (dd_transparent and inst.is_dd):
                continue
            if inst.kind == "barrier":
                cuts.append(inst.start)
            else:
                busy.append(inst)
        if not busy:
            continue
        measures = [inst.start for inst in busy if inst.kind == "measure"]
        limit = max(measures) if measures else max(inst.start for inst in busy)
        busy.sort(key=lambda inst: (inst.start, inst.end))
        horizon = busy[0].end
        for inst in busy[1:]:
            if inst.start > limit:
                break
            if inst.start > horizon:
                gaps.extend(_cut(q, horizon, inst.start, cuts))
            horizon = max(horizon, inst.end)
    gaps.sort(key=lambda g: (g[1], g[0]))
    return gaps


def _cut(q, lo, hi, cuts):
    points = sorted({c for c in cuts if lo < c < hi})
    bounds = [lo, *points, hi]
    return [(q, a, b) for a, b in zip(bounds, bounds[1:])]


def extract_idles(circuit: ScheduledCircuit, min_length: Time = 0) -> list:
    """Idle windows at least ``min_length`` long, numbered in (start, qubit) order."""
    windows = []
    for q, lo, hi in find_gaps(circuit):
        if hi - lo >= min_length:
            idx = len(windows)
            windows.append(IdleWindow(id=idx, qubit=q, start=lo, end=hi, origin=(idx, 0)))
    return windows


def skipped_gaps(circuit: ScheduledCircuit, min_length: Time) -> list:
    return [g for g in find_gaps(circuit) if g[2] - g[1] < min_length]


# -- gate insertion ------------------------------------------------------------


def insert_gates(
    circuit: ScheduledCircuit,
    idles: Sequence[IdleWindow],
    device: DeviceModel,
    gate_duration: Optional[Time] = None,
) -> ScheduledCircuit:
    """Add one DD X instruction per gate start time held by ``idles``."""
    duration = device.x_gate_duration if gate_duration is None else gate_duration
    new = []
    for window in idles:
        for t in window.gates:
            new.append(Instruction("gate", (window.qubit,), t, duration, DD_GATE_NAME))
    if not new:
        return circuit
    busy = defaultdict(list)
    for inst in circuit.instructions:
        if inst.kind in ("delay", "barrier"):
            continue
        for q in inst.qubits:
            busy[q].append((inst.start, inst.end))
    for inst in new:
        q = inst.qubits[0]
        busy[q].append((inst.start, inst.end))
    for q, spans in busy.items():
        spans.sort()
        for (s0, e0), (s1, e1) in zip(spans, spans[1:]):
            if s1 < e0:
                raise CollisionError(f"inserted gate collides on qubit {q} at {s1}")
    return ScheduledCircuit(
        num_qubits=circuit.num_qubits,
        instructions=circuit.instructions + tuple(new),
        device=circuit.device,
    )
