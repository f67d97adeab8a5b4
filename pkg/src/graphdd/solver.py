"""Two-gate placement inside one idle, given at most one embedded neighbour.

Every X gate on a qubit flips the sign with which that qubit's Z error (and
any ZZ error it takes part in) accumulates.  Two gates half an idle apart
cancel the Z integral; sliding that pair across the idle changes the ZZ
integral with the neighbour continuously between ``D`` and ``-D``, so a
root exists.  All arithmetic here is exact.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .schedule import IdleWindow, Time


class SolverError(ValueError):
    pass


@dataclass(frozen=True)
class SignFunction:
    window_start: Time
    window_end: Time
    flips: tuple = ()
    initial_sign: int = 1

    def __post_init__(self):
        flips = tuple(self.flips)
        if any(b <= a for a, b in zip(flips, flips[1:])):
            raise SolverError("flips must be strictly increasing")
        object.__setattr__(self, "flips", flips)

    def value(self, t) -> int:
        n = bisect_right(self.flips, t)
        return self.initial_sign if n % 2 == 0 else -self.initial_sign

    def negated(self) -> "SignFunction":
        return SignFunction(self.window_start, self.window_end, self.flips, -self.initial_sign)

    @classmethod
    def of(cls, window: IdleWindow) -> "SignFunction":
        return cls(window.start, window.end, tuple(sorted(window.gates)))


@dataclass(frozen=True)
class PiecewiseLinear:
    breakpoints: tuple
    values: tuple

    def __call__(self, x):
        xs, ys = self.breakpoints, self.values
        if not xs[0] <= x <= xs[-1]:
            raise ValueError(f"{x} outside [{xs[0]}, {xs[-1]}]")
        i = bisect_right(xs, x) - 1
        if i >= len(xs) - 1:
            return ys[-1]
        x0, x1 = xs[i], xs[i + 1]
        return ys[i] + (ys[i + 1] - ys[i]) * Fraction(x - x0) / (x1 - x0)

    def first_root(self):
        """Smallest x with f(x) == 0, or None."""
        xs, ys = self.breakpoints, self.values
        if ys[0] == 0:
            return xs[0]
        for i in range(len(xs) - 1):
            y0, y1 = ys[i], ys[i + 1]
            if y1 == 0:
                return xs[i + 1]
            if (y0 < 0) != (y1 < 0):
                return xs[i] + Fraction(xs[i + 1] - xs[i]) * y0 / (y0 - y1)
        return None


@dataclass(frozen=True)
class OffsetSolution:
    offset: Fraction
    gate_times: tuple
    residual_zz: Fraction = Fraction(0)


def sign_product_integral(a: SignFunction, c: SignFunction, window) -> Fraction:
    """Exact signed measure of ``a(t) * c(t)`` over ``[lo, hi)``."""
    lo, hi = window
    if hi <= lo:
        return Fraction(0)
    cuts = sorted({t for t in a.flips if lo < t < hi} | {t for t in c.flips if lo < t < hi})
    sign = a.value(lo) * c.value(lo)
    total = Fraction(0)
    prev = lo
    for t in cuts:
        total += sign * (t - prev)
        prev = t
        sign = a.value(t) * c.value(t)
    total += sign * (hi - prev)
    return total


def two_gate_sign(window: IdleWindow, offset) -> SignFunction:
    start = Fraction(window.start)
    half = Fraction(window.end - window.start) / 2
    return SignFunction(window.start, window.end, (start + offset, start + offset + half))


def _breakpoints(window: IdleWindow, marks: Sequence) -> list:
    start = Fraction(window.start)
    half = Fraction(window.end - window.start) / 2
    pts = {Fraction(0), half}
    for m in marks:
        for o in (m - start, m - start - half):
            if 0 < o < half:
                pts.add(Fraction(o))
    return sorted(pts)


def delta_of_offset(current: IdleWindow, ancestor_flips_in_overlap: Sequence, overlap) -> PiecewiseLinear:
    """ZZ integral over ``overlap`` as a function of the gate-pair offset.

    The neighbour's sign is taken as +1 at the start of the overlap; only
    the root set of this function matters and it is sign-invariant.
    """
    lo, hi = overlap
    flips = tuple(sorted(f for f in ancestor_flips_in_overlap if lo < f < hi))
    ancestor = SignFunction(lo, hi, flips)
    offsets = _breakpoints(current, [*flips, lo, hi])
    values = tuple(sign_product_integral(ancestor, two_gate_sign(current, o), overlap) for o in offsets)
    return PiecewiseLinear(tuple(offsets), values)


def _solution(current: IdleWindow, offset, ancestor: Optional[SignFunction], overlap) -> OffsetSolution:
    sign = two_gate_sign(current, offset)
    residual = Fraction(0) if ancestor is None else sign_product_integral(ancestor, sign, overlap)
    return OffsetSolution(Fraction(offset), sign.flips, residual)


def _scaled_first_root(current: IdleWindow, flips, overlap):
    """Smallest root of the offset function, computed on an integer grid.

    All inputs are rescaled by a common denominator so the breakpoint scan
    runs on Python ints; the scan stops at the first sign change.  Returns
    the same value as ``delta_of_offset(...).first_root()``.
    """
    lo, hi = overlap
    start, end = current.start, current.end
    den = 2 * math.lcm(start.denominator, end.denominator, lo.denominator, hi.denominator, *(f.denominator for f in flips))
    S, E, LO, HI = (int(v * den) for v in (start, end, lo, hi))
    H = (E - S) // 2
    F = [int(f * den) for f in flips if lo < f < hi]
    offsets = {0, H}
    for m in (*F, LO, HI):
        for o in (m - S, m - S - H):
            if 0 < o < H:
                offsets.add(o)

    def delta(o):
        c1, c2 = S + o, S + o + H
        events = sorted([(f, 0) for f in F] + [(c, 1) for c in (c1, c2) if LO < c < HI])
        sa = 1
        sc = 1 if LO < c1 else (-1 if LO < c2 else 1)
        total, prev = 0, LO
        for t, who in events:
            total += sa * sc * (t - prev)
            prev = t
            if who:
                sc = -sc
            else:
                sa = -sa
        return total + sa * sc * (HI - prev)

    xs = sorted(offsets)
    x0, y0 = xs[0], delta(xs[0])
    if y0 == 0:
        return Fraction(x0, den)
    for x1 in xs[1:]:
        y1 = delta(x1)
        if y1 == 0:
            return Fraction(x1, den)
        if (y0 < 0) != (y1 < 0):
            return (x0 + Fraction((x1 - x0) * y0, y0 - y1)) / den
        x0, y0 = x1, y1
    return None


def solve_offset(current: IdleWindow, ancestor=None) -> OffsetSolution:
    """Place two gates T/2 apart so the Z and the shared ZZ integral vanish.

    ``ancestor`` is ``None`` or ``(embedded_window, overlap)``.
    """
    if ancestor is None:
        return _solution(current, 0, None, None)
    window, overlap = ancestor
    if overlap is None:
        return _solution(current, 0, None, None)
    root = _scaled_first_root(current, window.gates, overlap)
    if root is None:
        raise SolverError(f"no zero crossing for idle {current.id}; is the ancestor embedded?")
    # the root interpolates an exactly linear segment, so the residual is 0
    first = current.start + root
    return OffsetSolution(root, (first, first + Fraction(current.end - current.start, 2)), Fraction(0))


def closed_form_subinterval(current: IdleWindow, ancestor_gates, ancestor_window=None) -> OffsetSolution:
    """Closed-form placement when the current idle lies inside its ancestor.

    Zero ancestor gates strictly inside: any offset works, use 0.  One gate
    ``g`` inside: gates halfway between each endpoint and ``g``.  Two gates
    inside: the first goes halfway between them, the second half an idle
    later, or earlier when later would leave the window.
    """
    gates = sorted(Fraction(g) for g in ancestor_gates)
    if len(gates) != 2:
        raise SolverError("closed forms need exactly two ancestor gates")
    if ancestor_window is not None:
        lo, hi = ancestor_window
        if not lo <= current.start < current.end <= hi:
            raise SolverError(f"idle {current.id} is not a sub-interval of its ancestor")
    s, e = Fraction(current.start), Fraction(current.end)
    half = (e - s) / 2
    inside = [g for g in gates if s < g < e]
    if not inside:
        first = s
    elif len(inside) == 1:
        first = (s + inside[0]) / 2
    else:
        mid = (inside[0] + inside[1]) / 2
        first = mid if mid + half <= e else mid - half
    offset = first - s
    ancestor = SignFunction(min(s, gates[0]), max(e, gates[-1]), tuple(gates))
    return _solution(current, offset, ancestor, (s, e))
