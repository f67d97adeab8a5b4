"""Splitting idles: long idles at context changes, multi-ancestor idles into
sub-intervals that each need only the two-gate rule."""
from __future__ import annotations

import math
from bisect import bisect_left, bisect_right, insort
from collections import defaultdict
from copy import copy
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .schedule import DeviceModel, IdleWindow, Time, as_time
from .solver import delta_of_offset, two_gate_sign


@dataclass
class ContextChangeSet:
    """Per qubit, the sorted times at which a coupled neighbour's idle starts or ends."""

    times: dict = field(default_factory=lambda: defaultdict(list))

    @classmethod
    def from_idles(cls, idles, device: DeviceModel) -> "ContextChangeSet":
        raw = defaultdict(set)
        for w in idles:
            for q in device.neighbors.get(w.qubit, ()):
                raw[q].add(w.start)
                raw[q].add(w.end)
        out = cls()
        for q, ts in raw.items():
            out.times[q] = sorted(ts)
        return out

    def add_boundary(self, qubit: int, t, device: DeviceModel) -> None:
        for q in device.neighbors.get(qubit, ()):
            ts = self.times[q]
            i = bisect_left(ts, t)
            if i == len(ts) or ts[i] != t:
                insort(ts, t)

    def near(self, qubit: int, lo, hi) -> list:
        ts = self.times.get(qubit, [])
        return ts[bisect_left(ts, lo) : bisect_right(ts, hi)]


def renumber(idles) -> list:
    ordered = sorted(idles, key=lambda w: (w.start, w.qubit))
    out = []
    for i, w in enumerate(ordered):
        w = copy(w)
        object.__setattr__(w, "id", i)
        out.append(w)
    return out


def split_long_idles(
    idles,
    device: DeviceModel,
    changes: Optional[ContextChangeSet] = None,
    max_idle: Optional[Time] = None,
    min_length: Time = 0,
    grid: Optional[int] = None,
):
    """Cut every idle longer than ``max_idle`` into near-equal pieces.

    Each ideal cut snaps to the nearest context change within a quarter of
    the ideal piece length, provided no piece then exceeds ``max_idle``.
    Cuts that find no context change are rounded onto ``grid`` when given.
    Returns ``(windows, report)``; windows are renumbered in time order.
    """
    limit = device.max_idle if max_idle is None else max_idle
    if changes is None:
        changes = ContextChangeSet.from_idles(idles, device)
    out = []
    split_count = 0
    for w in sorted(idles, key=lambda w: (w.start, w.qubit, w.id)):
        dur = Fraction(w.duration)
        n = math.ceil(dur / limit)
        if min_length:
            n = min(n, max(1, math.floor(dur / min_length)))
        if n <= 1:
            out.append(w)
            continue
        split_count += 1
        piece = dur / n
        tol = piece / 4
        cuts = []
        prev = Fraction(w.start)
        for k in range(1, n):
            ideal = w.start + k * piece
            nxt = w.start + (k + 1) * piece
            best = None
            for c in changes.near(w.qubit, ideal - tol, ideal + tol):
                if not prev < c < w.end:
                    continue
                left, right = c - prev, nxt - c
                if left > limit or right > limit or left < min_length or right < min_length:
                    continue
                if best is None or abs(c - ideal) < abs(best - ideal):
                    best = c
            cut = ideal if best is None else best
            if best is None and grid:
                snapped = round(ideal / grid) * grid
                if prev < snapped < w.end:
                    cut = snapped
            cuts.append(as_time(cut))
            changes.add_boundary(w.qubit, as_time(cut), device)
            prev = Fraction(cut)
        bounds = [w.start, *cuts, w.end]
        base = w.origin[0] if w.origin[0] is not None else w.id
        for k, (a, b) in enumerate(zip(bounds, bounds[1:])):
            out.append(IdleWindow(id=w.id, qubit=w.qubit, start=a, end=b, origin=(base, k)))
    report = {"long_idles_split": split_count, "windows_after_split": len(out)}
    return renumber(out), report


def _merge_short(bounds, min_length):
    pieces = list(zip(bounds, bounds[1:]))
    if not min_length:
        return pieces
    merged = []
    for a, b in pieces:
        if merged and b - a < min_length:
            merged[-1] = (merged[-1][0], b)
        else:
            merged.append((a, b))
    if len(merged) > 1 and merged[0][1] - merged[0][0] < min_length:
        merged[1] = (merged[0][0], merged[1][1])
        merged.pop(0)
    return merged


def _constrained_offset(piece: IdleWindow, constraints):
    """Offset minimising the largest |ZZ integral| over all constraints."""
    deltas = [delta_of_offset(piece, flips, overlap) for flips, overlap in constraints]
    candidates = set()
    for d in deltas:
        candidates.update(d.breakpoints)
        root = d.first_root()
        if root is not None:
            candidates.add(root)
    best, best_cost = None, None
    for o in sorted(candidates):
        cost = max(abs(d(o)) for d in deltas)
        if best_cost is None or cost < best_cost:
            best, best_cost = o, cost
    return best, best_cost


def split_fvs_node(node: IdleWindow, embedded_neighbors: Sequence, min_length: Time = 0):
    """Split a multi-ancestor idle so every piece is solved by gates at
    ``{piece start, piece midpoint}``.

    Cuts fall on every neighbour boundary and neighbour gate time inside the
    node, so each neighbour's sign is constant on each piece and either
    covers it or misses it.  ``embedded_neighbors`` holds windows with their
    gates fixed, optionally paired with an overlap.  Returns
    ``(pieces, fallbacks)``; ``fallbacks`` counts merged pieces that could
    not be zeroed exactly.
    """
    neighbors = []
    for item in embedded_neighbors:
        w = item[0] if isinstance(item, tuple) else item
        if w.overlap(node) is not None:
            neighbors.append(w)
    lo, hi = node.start, node.end
    points = set()
    for w in neighbors:
        for t in (w.start, w.end, *w.gates):
            if lo < t < hi:
                points.add(as_time(t))
    bounds = [lo, *sorted(points), hi]
    pieces = _merge_short(bounds, min_length)

    out = []
    fallbacks = 0
    for k, (a, b) in enumerate(pieces):
        piece = IdleWindow(id=node.id, qubit=node.qubit, start=a, end=b, origin=(*node.origin[:2], k))
        constraints = []
        for w in neighbors:
            ov = piece.overlap(w)
            if ov is None:
                continue
            inner = [g for g in w.gates if ov[0] < g < ov[1]]
            if inner or ov != (piece.start, piece.end):
                constraints.append((inner, ov))
        offset = 0
        if constraints:
            offset, cost = _constrained_offset(piece, constraints)
            if cost:
                fallbacks += 1
        out.append(piece.with_gates(two_gate_sign(piece, offset).flips))
    return out, fallbacks
