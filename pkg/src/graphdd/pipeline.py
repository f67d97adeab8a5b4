"""End-to-end embedding: GraphDD, the 25%/75% baseline, and quantization."""
from __future__ import annotations

import time
from bisect import bisect_right
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from gmpy2 import mpq

from .graph import DDGraph, TraversalPlan, bfs_traversal, build_graph
from .schedule import (
    DeviceModel,
    IdleWindow,
    ScheduleError,
    ScheduledCircuit,
    extract_idles,
    find_gaps,
    insert_gates,
)
from .solver import solve_offset
from .splitter import renumber, split_fvs_node, split_long_idles

STRATEGIES = ("graphdd", "standard", "none")


class QuantizationError(ScheduleError):
    """A window cannot hold its gates on the device grid."""


@dataclass(frozen=True)
class EmbedConfig:
    strategy: str = "graphdd"
    max_idle: Optional[int] = None
    exact_mode: bool = False

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.max_idle is not None and self.max_idle <= 0:
            raise ValueError("max_idle override must be positive")


@dataclass
class EmbedStats:
    idle_count: int = 0
    node_count_after_split: int = 0
    edge_count: int = 0
    fvs_count: int = 0
    gates_inserted: int = 0
    skipped_idles: int = 0
    long_idles_split: int = 0
    fvs_subintervals: int = 0
    fallbacks: int = 0
    wall_time: float = 0.0
    phases: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "idles": self.idle_count,
            "nodes": self.node_count_after_split,
            "edges": self.edge_count,
            "fvs": self.fvs_count,
            "gates": self.gates_inserted,
            "wall_time_us": int(round(self.wall_time * 1e6)),
            "phases": {k: int(round(v * 1e6)) for k, v in self.phases.items()},
            "splits": {
                "skipped_idles": self.skipped_idles,
                "long_idles_split": self.long_idles_split,
                "fvs_nodes": self.fvs_count,
                "fvs_subintervals": self.fvs_subintervals,
                "fallbacks": self.fallbacks,
            },
        }


@dataclass
class EmbeddingPlan:
    """Solver output before quantization: flip times per final window."""

    windows: list
    stats: EmbedStats
    graph: Optional[DDGraph] = None
    traversal: Optional[TraversalPlan] = None
    on_grid: bool = False  # flips already sit on the device grid


class _Clock:
    def __init__(self, stats: EmbedStats):
        self.stats = stats

    @contextmanager
    def phase(self, name: str):
        t0 = time.perf_counter()
        yield
        self.stats.phases[name] = self.stats.phases.get(name, 0.0) + time.perf_counter() - t0


def _idles(circuit, device, exact, stats, clock):
    min_len = device.min_idle(exact)
    with clock.phase("extract"):
        gaps = find_gaps(circuit)
        idles = extract_idles(circuit, min_len)
    stats.idle_count = len(idles)
    stats.skipped_idles = len(gaps) - len(idles)
    return idles, min_len


def plan_graphdd(circuit: ScheduledCircuit, device: DeviceModel, config: EmbedConfig = EmbedConfig()) -> EmbeddingPlan:
    stats = EmbedStats()
    clock = _Clock(stats)
    t0 = time.perf_counter()
    exact = config.exact_mode
    idles, min_len = _idles(circuit, device, exact, stats, clock)

    with clock.phase("graph"):
        graph = build_graph(idles, device)
    with clock.phase("split_long"):
        max_idle = config.max_idle or device.max_idle
        grid = None if exact else device.granularity
        windows, report = split_long_idles(idles, device, max_idle=max_idle, min_length=min_len, grid=grid)
        stats.long_idles_split = report["long_idles_split"]
        if stats.long_idles_split:
            graph = build_graph(windows, device)
    with clock.phase("traverse"):
        plan = bfs_traversal(graph)

    placer = None if exact else _GridPlacer(device)
    embedded = {}

    def settle(n, pieces):
        if placer is not None:
            nbrs = [piece for m in graph.neighbors(n) if m in embedded for piece in embedded[m]]
            pieces = [placer.place(piece, nbrs) for piece in pieces]
        embedded[n] = pieces

    with clock.phase("embed"):
        for n in plan.order:
            if n in plan.fvs:
                continue
            w = graph.nodes[n]
            p = plan.parent[n]
            ancestor = None
            if p is not None:
                anc = embedded[p][0]
                ancestor = (anc, w.overlap(anc))
            settle(n, [w.with_gates(solve_offset(w, ancestor).gate_times)])
    with clock.phase("fvs"):
        for n in plan.order:
            if n not in plan.fvs:
                continue
            nbrs = [piece for m in graph.neighbors(n) if m in embedded for piece in embedded[m]]
            pieces, fallbacks = split_fvs_node(graph.nodes[n], nbrs, min_len)
            settle(n, pieces)
            stats.fvs_subintervals += len(pieces)
            stats.fallbacks += fallbacks

    final = renumber([piece for pieces in embedded.values() for piece in pieces])
    stats.node_count_after_split = len(final)
    stats.edge_count = len(graph.edges)
    stats.fvs_count = len(plan.fvs)
    stats.wall_time = time.perf_counter() - t0
    return EmbeddingPlan(final, stats, graph, plan, on_grid=not exact)


def plan_standard(circuit: ScheduledCircuit, device: DeviceModel, config: EmbedConfig = EmbedConfig("standard")) -> EmbeddingPlan:
    """Two gates per idle at 25% and 75% of its duration."""
    stats = EmbedStats()
    clock = _Clock(stats)
    t0 = time.perf_counter()
    idles, _ = _idles(circuit, device, config.exact_mode, stats, clock)
    with clock.phase("embed"):
        windows = []
        for w in idles:
            quarter = Fraction(w.duration) / 4
            windows.append(w.with_gates((w.start + quarter, w.start + 3 * quarter)))
    stats.node_count_after_split = len(windows)
    stats.wall_time = time.perf_counter() - t0
    return EmbeddingPlan(windows, stats)


def plan_none(circuit: ScheduledCircuit, device: DeviceModel, config: EmbedConfig = EmbedConfig("none")) -> EmbeddingPlan:
    stats = EmbedStats()
    stats.idle_count = len(extract_idles(circuit, device.min_idle(config.exact_mode)))
    return EmbeddingPlan([], stats)


PLANNERS = {"graphdd": plan_graphdd, "standard": plan_standard, "none": plan_none}


def _round_to_grid(t: Fraction, g: int) -> int:
    q, r = divmod(t, g)
    q = int(q)
    return (q + 1) * g if r * 2 > g else q * g


def quantize(gate_times, window, device: DeviceModel) -> list:
    """Snap gate start times onto the device grid inside ``window``.

    Round to the nearest multiple of the granularity (ties go down), clamp
    so each gate fits inside the window, then sweep forward so starts are
    strictly increasing and at least one gate duration apart.
    """
    g, d = device.granularity, device.x_gate_duration
    lo, hi = window
    lower = -((-Fraction(lo)) // g) * g
    upper = ((Fraction(hi) - d) // g) * g
    step = -(-max(d, g) // g) * g  # smallest grid multiple >= d
    out = []
    for t in sorted(Fraction(x) for x in gate_times):
        q = min(max(_round_to_grid(t, g), lower), upper)
        if out and q < out[-1] + step:
            q = out[-1] + step
        out.append(int(q))
    if out and out[-1] > upper:
        # pull back from the right edge
        out[-1] = int(upper)
        for i in range(len(out) - 2, -1, -1):
            if out[i] > out[i + 1] - step:
                out[i] = out[i + 1] - step
    if out and (out[0] < lower or out[-1] > upper):
        raise QuantizationError(f"window [{lo}, {hi}) cannot hold {len(out)} gates")
    return out


class _GridPlacer:
    """Moves freshly solved flips onto the device grid, one node at a time.

    Each flip goes to the grid point just below or just above its exact
    position, whichever keeps the accumulated rounding error smallest.  The
    error is tracked per original idle (Z) and per pair of original idles
    (ZZ), because the residual oracle integrates over whole original idles
    and their full overlaps.
    """

    def __init__(self, device: DeviceModel):
        self.device = device
        self.g = device.granularity
        self.d = device.x_gate_duration
        self.half = Fraction(self.d, 2)
        self.z_err = {}
        self.zz_err = {}

    def place(self, window: IdleWindow, neighbors) -> IdleWindow:
        g, d = self.g, self.d
        half = mpq(d, 2)
        lower = -((-_q(window.start)) // g) * g
        upper = ((_q(window.end) - d) // g) * g
        step = -(-max(d, g) // g) * g  # smallest grid multiple >= d
        flips = sorted(_q(f) for f in window.gates)
        near = []
        for nb in neighbors:
            ov = nb.overlap(window)
            if ov is not None:
                near.append((_q(ov[0]), _q(ov[1]), sorted(_q(x) for x in nb.gates), _pair(window, nb)))
        origin = window.origin[0]
        z0 = self.z_err.get(origin, 0)
        starts = []
        for i, f in enumerate(flips):
            target = f - half
            base = int(target // g) * g
            options = (base,) if base == target else (base, base + g)
            floor_ = lower if not starts else max(lower, starts[-1] + step)
            before = 2 if i % 2 == 0 else -2
            best = None
            for c in sorted({int(min(max(c, floor_), upper)) for c in options}):
                shift = c + half - f
                dz = before * shift
                dzz = {}
                cost = abs(z0 + dz) * 2
                if shift:
                    mid = f + shift / 2
                    for lo, hi, nflips, key in near:
                        if lo <= mid < hi:
                            v = dzz[key] = dzz.get(key, 0) + (dz if bisect_right(nflips, mid) % 2 == 0 else -dz)
                            cost = max(cost, abs(self.zz_err.get(key, 0) + v))
                rank = (cost, abs(shift), c)
                if best is None or rank < best[0]:
                    best = (rank, c, dz, dzz)
            _, c, dz, dzz = best
            z0 += dz
            for k, v in dzz.items():
                self.zz_err[k] = self.zz_err.get(k, 0) + v
            starts.append(c)
        self.z_err[origin] = z0
        if starts and (starts[-1] > upper or starts[0] < lower):
            starts = quantize([Fraction(f) - Fraction(d, 2) for f in window.gates], (window.start, window.end), self.device)
        if d % 2 == 0:
            return window.with_gates(s + d // 2 for s in starts)
        return window.with_gates(Fraction(2 * s + d, 2) for s in starts)


def _q(t):
    return mpq(t.numerator, t.denominator) if isinstance(t, Fraction) else mpq(t)


def _pair(a: IdleWindow, b: IdleWindow) -> tuple:
    return tuple(sorted((a.origin[0], b.origin[0])))


def realize(circuit: ScheduledCircuit, plan: EmbeddingPlan, device: DeviceModel, exact: bool = False) -> ScheduledCircuit:
    """Turn solver flip times into inserted X instructions."""
    stats = plan.stats
    clock = _Clock(stats)
    t0 = time.perf_counter()
    with clock.phase("quantize"):
        half = Fraction(device.x_gate_duration, 2)
        if exact:
            placed = plan.windows
        elif plan.on_grid:
            placed = [w.with_gates(int(f - half) for f in w.gates) for w in plan.windows]
        else:
            placed = [
                w.with_gates(quantize([f - half for f in w.gates], (w.start, w.end), device)) for w in plan.windows
            ]
    with clock.phase("insert"):
        out = insert_gates(circuit, placed, device, gate_duration=0 if exact else None)
    stats.gates_inserted = sum(len(w.gates) for w in placed)
    stats.wall_time += time.perf_counter() - t0
    return out


def embed(circuit: ScheduledCircuit, device: DeviceModel, config: EmbedConfig = EmbedConfig()):
    """Plan and realise with ``config.strategy``; returns ``(circuit, stats)``."""
    plan = PLANNERS[config.strategy](circuit, device, config)
    return realize(circuit, plan, device, config.exact_mode), plan.stats


def graphdd_embed(circuit: ScheduledCircuit, device: DeviceModel, config: Optional[EmbedConfig] = None):
    """Returns ``(embedded_circuit, stats, ledger)``; the ledger is measured on the output."""
    from .oracle import compute_residuals

    config = config or EmbedConfig()
    if config.strategy != "graphdd":
        config = EmbedConfig("graphdd", config.max_idle, config.exact_mode)
    out, stats = embed(circuit, device, config)
    return out, stats, compute_residuals(out, device)


def standard_dd_embed(circuit: ScheduledCircuit, device: DeviceModel, config: Optional[EmbedConfig] = None):
    exact = config.exact_mode if config else False
    return embed(circuit, device, EmbedConfig("standard", exact_mode=exact))
