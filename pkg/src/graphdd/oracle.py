"""Independent verification of an embedded circuit.

Nothing here knows how gates were chosen.  Idle windows and crosstalk
edges are re-derived from the circuit, DD gates flip the toggling-frame
sign at their temporal centre, and the residuals are the exact coefficients
of each Z and ZZ error rate in the accumulated phase.
"""
from __future__ import annotations

import json
import math
from bisect import bisect_left
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

import numpy as np

from .schedule import DD_GATE_NAME, DeviceModel, ScheduledCircuit, _time_to_json, find_gaps

LOGICAL_X = ("x", DD_GATE_NAME)


def _signed_segments(lo, hi, flips):
    """[(a, b, sign)] covering [lo, hi); sign starts +1 and toggles at each flip."""
    segs = []
    sign = 1
    prev = Fraction(lo)
    for f in flips:
        if f <= lo:
            sign = -sign
            continue
        if f >= hi:
            break
        segs.append((prev, f, sign))
        prev, sign = f, -sign
    segs.append((prev, Fraction(hi), sign))
    return segs


def _integral(segs, lo=None, hi=None) -> Fraction:
    total = Fraction(0)
    for a, b, s in segs:
        a = a if lo is None else max(a, lo)
        b = b if hi is None else min(b, hi)
        if b > a:
            total += s * (b - a)
    return total


def _product_integral(sa, sb, lo, hi) -> Fraction:
    total = Fraction(0)
    i = j = 0
    while i < len(sa) and j < len(sb):
        a0, a1, x = sa[i]
        b0, b1, y = sb[j]
        s, e = max(a0, b0, lo), min(a1, b1, hi)
        if e > s:
            total += x * y * (e - s)
        if a1 <= b1:
            i += 1
        else:
            j += 1
    return total


@dataclass
class ResidualLedger:
    windows: list  # (qubit, start, end) per idle id
    edges: list  # (idle_a, idle_b) per edge id
    z_residual: dict = field(default_factory=dict)
    zz_residual: dict = field(default_factory=dict)

    @property
    def max_abs_z(self) -> Fraction:
        return max((abs(v) for v in self.z_residual.values()), default=Fraction(0))

    @property
    def max_abs_zz(self) -> Fraction:
        return max((abs(v) for v in self.zz_residual.values()), default=Fraction(0))

    @property
    def all_zero(self) -> bool:
        return self.max_abs_z == 0 and self.max_abs_zz == 0

    def edge_pair(self, edge_id: int) -> tuple:
        a, b = self.edges[edge_id]
        qa, qb = self.windows[a][0], self.windows[b][0]
        return (min(qa, qb), max(qa, qb))

    def violations(self, z_tol=0, zz_tol=0) -> dict:
        return {
            "z": [i for i, v in self.z_residual.items() if abs(v) > z_tol],
            "zz": [i for i, v in self.zz_residual.items() if abs(v) > zz_tol],
        }

    def to_dict(self) -> dict:
        return {
            "idles": [
                {"id": i, "qubit": q, "start": _time_to_json(lo), "end": _time_to_json(hi),
                 "z": _time_to_json(self.z_residual[i])}
                for i, (q, lo, hi) in enumerate(self.windows)
            ],
            "edges": [
                {"id": k, "idles": [a, b], "zz": _time_to_json(self.zz_residual[k])}
                for k, (a, b) in enumerate(self.edges)
            ],
            "max_abs_z": _time_to_json(self.max_abs_z),
            "max_abs_zz": _time_to_json(self.max_abs_zz),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def dd_flips(circuit: ScheduledCircuit) -> dict:
    """Sorted DD-gate centre times per qubit."""
    flips = defaultdict(list)
    for inst in circuit.instructions:
        if inst.is_dd:
            flips[inst.qubits[0]].append(Fraction(inst.start) + Fraction(inst.duration) / 2)
    return {q: sorted(v) for q, v in flips.items()}


def compute_residuals(circuit: ScheduledCircuit, device: DeviceModel) -> ResidualLedger:
    gaps = find_gaps(circuit, dd_transparent=True)
    flips = dd_flips(circuit)
    segs = []
    for q, lo, hi in gaps:
        fs = flips.get(q, ())
        segs.append(_signed_segments(lo, hi, fs[bisect_left(fs, lo) : bisect_left(fs, hi)]))
    ledger = ResidualLedger(windows=list(gaps), edges=[])
    for i, s in enumerate(segs):
        ledger.z_residual[i] = _integral(s)

    per_qubit = defaultdict(list)
    for i, (q, lo, hi) in enumerate(gaps):
        per_qubit[q].append(i)
    pairs = []
    for qa, qb in sorted(device.coupling):
        for i in per_qubit.get(qa, ()):
            _, alo, ahi = gaps[i]
            for j in per_qubit.get(qb, ()):
                _, blo, bhi = gaps[j]
                if blo >= ahi:
                    break
                lo, hi = max(alo, blo), min(ahi, bhi)
                if hi > lo:
                    pairs.append((min(i, j), max(i, j), lo, hi))
    pairs.sort()
    for k, (i, j, lo, hi) in enumerate(pairs):
        ledger.edges.append((i, j))
        ledger.zz_residual[k] = _product_integral(segs[i], segs[j], Fraction(lo), Fraction(hi))
    return ledger


# -- noise draws and metrics ---------------------------------------------------


@dataclass(frozen=True)
class NoiseDraw:
    eps: tuple  # radians per tick, one per qubit
    j: Mapping  # radians per tick, keyed by coupling pair
    seed: Optional[int] = None


def draw_noise(device: DeviceModel, seed: int, eps_scale: float = 1e-4, j_scale: float = 1e-4) -> NoiseDraw:
    """Uniform draws in ``[-scale, scale]``, reproducible by ``seed``."""
    rng = np.random.default_rng(seed)
    eps = tuple(float(x) for x in rng.uniform(-eps_scale, eps_scale, device.num_qubits))
    pairs = sorted(device.coupling)
    js = rng.uniform(-j_scale, j_scale, len(pairs))
    return NoiseDraw(eps, {p: float(v) for p, v in zip(pairs, js)}, seed)


def draw_many(device: DeviceModel, n: int, seed: int, **kw) -> list:
    seeds = np.random.SeedSequence(seed).generate_state(n)
    return [draw_noise(device, int(s), **kw) for s in seeds]


def success_proxy(ledger: ResidualLedger, draws: Sequence[NoiseDraw]) -> float:
    """Mean over draws of the product of cos^2(rate * residual) terms."""
    if not draws:
        raise ValueError("need at least one noise draw")
    total = 0.0
    for draw in draws:
        p = 1.0
        for i, z in ledger.z_residual.items():
            if z:
                p *= math.cos(draw.eps[ledger.windows[i][0]] * float(z)) ** 2
        for k, zz in ledger.zz_residual.items():
            if zz:
                p *= math.cos(draw.j[ledger.edge_pair(k)] * float(zz)) ** 2
        total += p
    return total / len(draws)


def selectivity(counts: Mapping[str, float], correct: str) -> float:
    """log2 of the correct outcome's frequency over the most frequent wrong one."""
    if not counts:
        raise ValueError("counts must be non-empty")
    p_correct = counts.get(correct, 0)
    p_next = max((v for k, v in counts.items() if k != correct), default=0)
    if p_correct <= 0:
        return -math.inf
    if p_next <= 0:
        return math.inf
    return math.log2(p_correct / p_next)


# -- dense simulation ----------------------------------------------------------


class SimulationError(ValueError):
    pass


def _idle_spans(circuit: ScheduledCircuit) -> dict:
    """Per qubit, the gaps between consecutive non-DD instructions."""
    spans = {}
    for q, insts in circuit.by_qubit().items():
        busy = sorted((i.start, i.end) for i in insts if i.kind == "gate" and not i.is_dd)
        out = []
        for (_, e0), (s1, _) in zip(busy, busy[1:]):
            if s1 > e0:
                out.append((Fraction(e0), Fraction(s1)))
        spans[q] = out
    return spans


def _z_signs(n: int) -> np.ndarray:
    idx = np.arange(2**n)
    return np.stack([1 - 2 * ((idx >> k) & 1) for k in range(n)]).astype(float)


def simulate_dense(circuit: ScheduledCircuit, draw: NoiseDraw, coupling=None, max_qubits: int = 10) -> np.ndarray:
    """Full unitary of an idle-only circuit under the quasi-static error model.

    Only delays, barriers and X gates are allowed.  X gates act instantly at
    their centre; between events every idle qubit accrues ``eps * Z`` and
    every mutually idle coupled pair accrues ``J * ZZ``.
    """
    n = circuit.num_qubits
    if n > max_qubits:
        raise SimulationError(f"{n} qubits exceeds the dense limit of {max_qubits}")
    for inst in circuit.instructions:
        if inst.kind == "gate" and inst.name not in LOGICAL_X:
            raise SimulationError(f"non-X gate {inst.name!r} in an idle-only circuit")
        if inst.kind == "measure":
            raise SimulationError("measurements are not unitary")
    pairs = sorted(coupling if coupling is not None else draw.j.keys())
    spans = _idle_spans(circuit)
    xs = defaultdict(list)
    for inst in circuit.instructions:
        if inst.kind == "gate":
            xs[Fraction(inst.start) + Fraction(inst.duration) / 2].append(inst.qubits[0])

    times = set(xs)
    for q, ss in spans.items():
        for a, b in ss:
            times.update((a, b))
    times = sorted(times)
    zs = _z_signs(n)
    dim = 2**n
    u = np.eye(dim, dtype=complex)
    idx = np.arange(dim)

    def idle(q, a, b):
        return any(lo <= a and b <= hi for lo, hi in spans.get(q, ()))

    for k, t in enumerate(times):
        for q in xs.get(t, ()):
            u = u[idx ^ (1 << q), :]
        if k + 1 == len(times):
            break
        a, b = t, times[k + 1]
        dt = float(b - a)
        active = [q for q in range(n) if idle(q, a, b)]
        h = np.zeros(dim)
        for q in active:
            h += draw.eps[q] * zs[q]
        for qa, qb in pairs:
            if qa in active and qb in active:
                h += draw.j[(qa, qb)] * zs[qa] * zs[qb]
        u = np.exp(-1j * h * dt)[:, None] * u
    return u


def predicted_unitary(circuit: ScheduledCircuit, ledger: ResidualLedger, draw: NoiseDraw) -> np.ndarray:
    """Diagonal error unitary implied by the ledger.

    Logical X gates before a window conjugate its error terms, so each
    window's sign is corrected by the parity of earlier logical X gates on
    its qubit.
    """
    n = circuit.num_qubits
    logical = defaultdict(list)
    for inst in circuit.instructions:
        if inst.kind == "gate" and inst.name == "x":
            logical[inst.qubits[0]].append(inst.start)

    def frame(i):
        q, lo, _ = ledger.windows[i]
        return -1 if sum(1 for t in logical[q] if t < lo) % 2 else 1

    zs = _z_signs(n)
    phase = np.zeros(2**n)
    for i, z in ledger.z_residual.items():
        q = ledger.windows[i][0]
        phase += frame(i) * draw.eps[q] * float(z) * zs[q]
    for k, zz in ledger.zz_residual.items():
        a, b = ledger.edges[k]
        qa, qb = ledger.edge_pair(k)
        phase += frame(a) * frame(b) * draw.j[(qa, qb)] * float(zz) * zs[qa] * zs[qb]
    return np.diag(np.exp(-1j * phase))


def phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Max-norm distance between ``u`` and ``v`` after removing the best global phase."""
    overlap = np.trace(v.conj().T @ u)
    phase = overlap / abs(overlap) if abs(overlap) > 1e-300 else 1.0
    return float(np.max(np.abs(u - phase * v)))
