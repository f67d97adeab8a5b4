"""Scheduled benchmark circuits on synthetic topologies.

The BV and QFT generators reproduce the idle structure of those algorithms
on a line of qubits (long staggered mutual idles for BV, many short idles
for QFT); they are not a transpiler.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .schedule import DeviceModel, Instruction, ScheduleError, ScheduledCircuit

DEFAULT_DURATIONS = {"1q": 40, "2q": 280, "measure": 1600}
HEAVY_HEX_SIZES = (127,)


@dataclass(frozen=True)
class GateSpec:
    name: str
    qubits: tuple
    duration: int = 0
    kind: str = "gate"

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        if self.kind != "barrier" and self.duration <= 0:
            raise ScheduleError(f"{self.name} needs a positive duration")


@dataclass(frozen=True)
class TopologySpec:
    kind: str
    width: int

    def __post_init__(self):
        if self.kind not in ("line", "ring", "heavy_hex"):
            raise ValueError(f"unknown topology {self.kind!r}")
        if self.kind == "heavy_hex" and self.width not in HEAVY_HEX_SIZES:
            raise ValueError(f"heavy_hex supports widths {HEAVY_HEX_SIZES}")


def _heavy_hex_rows():
    # 127-qubit Eagle layout: 7 rows joined by 4 bridge qubits per gap
    rows, q = [], 0
    for r in range(7):
        cols = range(1, 15) if r == 6 else range(0, 14 if r == 0 else 15)
        row = {}
        for c in cols:
            row[c] = q
            q += 1
        rows.append(row)
        if r < 6:
            bridge_cols = (0, 4, 8, 12) if r % 2 == 0 else (2, 6, 10, 14)
            rows.append({c: q + i for i, c in enumerate(bridge_cols)})
            q += 4
    return rows


def heavy_hex_edges() -> list:
    rows = _heavy_hex_rows()
    edges = set()
    for k in range(0, len(rows), 2):
        row = rows[k]
        cols = sorted(row)
        for a, b in zip(cols, cols[1:]):
            edges.add((row[a], row[b]))
        if k + 2 < len(rows):
            for c, bq in rows[k + 1].items():
                edges.add((row[c], bq))
                edges.add((bq, rows[k + 2][c]))
    return sorted((min(e), max(e)) for e in edges)


def heavy_hex_path() -> list:
    """A long snake through the 127-qubit lattice, for line-shaped circuits."""
    rows = _heavy_hex_rows()
    path = [rows[0][c] for c in range(0, 13)] + [rows[1][12]] + [rows[2][c] for c in (12, 13, 14)]
    col = 14
    for k in range(3, 13, 2):
        path.append(rows[k][col])
        data = rows[k + 1]
        cols = sorted(data, reverse=(col == 14))
        path.extend(data[c] for c in cols)
        col = cols[-1]
    return path


def make_device(
    topology: TopologySpec,
    granularity: int = 1,
    x_gate_duration: int = 0,
    max_idle: int = 100_000,
) -> DeviceModel:
    w = topology.width
    if topology.kind == "line":
        pairs = [(i, i + 1) for i in range(w - 1)]
    elif topology.kind == "ring":
        pairs = [(i, (i + 1) % w) for i in range(w)] if w > 2 else [(i, i + 1) for i in range(w - 1)]
    else:
        pairs = heavy_hex_edges()
    return DeviceModel(
        num_qubits=w,
        coupling=frozenset(pairs),
        granularity=granularity,
        x_gate_duration=x_gate_duration,
        max_idle=max_idle,
    )


def load_config(path) -> dict:
    """Read a JSON bench config: ``{"durations": {...}, "topology": {...}}``."""
    with open(path) as fh:
        cfg = json.load(fh)
    durations = {**DEFAULT_DURATIONS, **cfg.get("durations", {})}
    return {**cfg, "durations": durations}


def asap_schedule(gates: Sequence[GateSpec], device: DeviceModel, num_qubits: Optional[int] = None, name: str = "") -> ScheduledCircuit:
    """Start each gate as soon as all its qubits are free."""
    width = device.num_qubits if num_qubits is None else num_qubits
    free = [0] * width
    out = []
    for g in gates:
        if any(not 0 <= q < width for q in g.qubits):
            raise ScheduleError(f"{g.name} uses a qubit outside 0..{width - 1}")
        if g.kind == "gate" and len(g.qubits) == 2 and not device.coupled(*g.qubits):
            raise ScheduleError(f"{g.name} on uncoupled pair {g.qubits}")
        t = max(free[q] for q in g.qubits)
        kind = "measure" if g.name == "measure" else g.kind
        out.append(Instruction(kind, g.qubits, t, g.duration, g.name if kind == "gate" else None))
        for q in g.qubits:
            free[q] = t + g.duration
    return ScheduledCircuit(num_qubits=width, instructions=tuple(out), device=name)


def _check_width(width, device, layout):
    if width < 1:
        raise ValueError("width must be >= 1")
    if width > device.num_qubits:
        raise ValueError(f"width {width} exceeds device width {device.num_qubits}")
    layout = list(range(width)) if layout is None else list(layout)[:width]
    if len(layout) < width:
        raise ValueError("layout is shorter than the circuit width")
    return layout


def _measure_all(qubits, durations):
    return [GateSpec("barrier", tuple(qubits), 0, kind="barrier")] + [
        GateSpec("measure", (q,), durations["measure"]) for q in qubits
    ]


def gen_bv(width: int, device: DeviceModel, durations=None, layout=None) -> ScheduledCircuit:
    """Bernstein-Vazirani with the all-ones secret as a CX parity cascade.

    Data qubits are the first ``width - 1`` layout positions, the ancilla is
    the last.  The cascade computes the parity into the ancilla, the
    un-cascade restores the data qubits.
    """
    d = {**DEFAULT_DURATIONS, **(durations or {})}
    qs = _check_width(width, device, layout)
    one, two = d["1q"], d["2q"]
    gates = [GateSpec("x", (qs[-1],), one)] if width > 1 else []
    gates += [GateSpec("h", (q,), one) for q in qs]
    gates += [GateSpec("cx", (qs[i], qs[i + 1]), two) for i in range(width - 1)]
    gates += [GateSpec("cx", (qs[i], qs[i + 1]), two) for i in reversed(range(width - 2))]
    gates += [GateSpec("h", (q,), one) for q in qs[:-1]]
    gates += _measure_all(qs, d)
    return asap_schedule(gates, device, name=f"bv{width}")


def gen_qft(width: int, device: DeviceModel, durations=None, layout=None) -> ScheduledCircuit:
    """One-hot QFT on a line via the controlled-phase + swap network.

    The input layer prepares the state whose transform is ``1010...10``.
    In round ``r`` the qubit at position 0 gets an H and is swapped along
    the line, meeting every remaining qubit once.  Each controlled phase is
    written in the native ``rz``/``cx`` form, so the control sits idle for
    one single-qubit slot in the middle, as in transpiled output.
    """
    d = {**DEFAULT_DURATIONS, **(durations or {})}
    qs = _check_width(width, device, layout)
    one, two = d["1q"], d["2q"]
    gates = []
    for q in qs:
        gates += [GateSpec("h", (q,), one), GateSpec("rz", (q,), one)]
    for r in range(width):
        gates.append(GateSpec("h", (qs[0],), one))
        for j in range(width - 1 - r):
            a, b = qs[j], qs[j + 1]
            gates += [
                GateSpec("rz", (a,), one),
                GateSpec("rz", (b,), one),
                GateSpec("cx", (a, b), two),
                GateSpec("rz", (b,), one),
                GateSpec("cx", (a, b), two),
            ]
            gates.append(GateSpec("swap", (qs[j], qs[j + 1]), 3 * two))
    gates += _measure_all(qs, d)
    return asap_schedule(gates, device, name=f"qft{width}")


def gen_random(
    width: int,
    depth: int,
    seed: int,
    device: DeviceModel,
    durations=None,
    layout=None,
    p_two: float = 0.4,
    p_busy: float = 0.5,
) -> ScheduledCircuit:
    """Random layers of 1- and 2-qubit gates with random durations.

    Durations are multiples of the device granularity, so idle boundaries
    stay on the device grid.
    """
    d = {**DEFAULT_DURATIONS, **(durations or {})}
    qs = _check_width(width, device, layout)
    rng = np.random.default_rng(seed)
    g = device.granularity
    base1 = max(g, math.ceil(d["1q"] / g) * g)
    base2 = max(g, math.ceil(d["2q"] / g) * g)
    pairs = [(a, b) for a, b in zip(qs, qs[1:]) if device.coupled(a, b)]
    if device.coupled(qs[0], qs[-1]) and width > 2:
        pairs.append((qs[-1], qs[0]))
    gates = [GateSpec("h", (q,), base1) for q in qs] if depth > 0 else []
    for _ in range(depth):
        used = set()
        order = rng.permutation(len(pairs)) if pairs else []
        for k in order:
            a, b = pairs[k]
            if a in used or b in used or rng.random() >= p_two:
                continue
            used.update((a, b))
            gates.append(GateSpec("cx", (a, b), int(base2 * rng.integers(1, 4))))
        for q in qs:
            if q not in used and rng.random() < p_busy:
                gates.append(GateSpec("sx", (q,), int(base1 * rng.integers(1, 6))))
    gates += _measure_all(qs, d)
    return asap_schedule(gates, device, name=f"random{width}x{depth}s{seed}")
