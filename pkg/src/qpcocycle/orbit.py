"""Exact combinatorics of the rotation ``x -> x + alpha`` on the unit circle.

Points are ``Fraction`` values in [0, 1). Brute-force oracles iterate the
rotation with integer arithmetic over a common denominator; the closed forms
read return times off the convergent table.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .frequency import ConvergentTable


class DomainError(ValueError):
    """Point outside the interval a closed-form query is defined on."""


class CapError(RuntimeError):
    """Brute-force iteration exceeded its step cap."""


def frac(x) -> Fraction:
    x = Fraction(x)
    return x - math.floor(x)


def rotate(x, k: int, table: ConvergentTable) -> Fraction:
    return frac(Fraction(x) + k * table.alpha)


@dataclass(frozen=True)
class Arc:
    """Arc ``[lo, hi)`` (``left_closed``) or ``(lo, hi]`` on the circle."""

    lo: Fraction
    hi: Fraction
    left_closed: bool = True

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    def offset(self, x) -> Fraction:
        return frac(Fraction(x) - self.lo)

    def contains(self, x) -> bool:
        y = self.offset(x)
        if self.left_closed:
            return y < self.length
        return 0 < y <= self.length

    def shift(self, d) -> "Arc":
        lo = frac(self.lo + d)
        return Arc(lo, lo + self.length, self.left_closed)

    def issubset(self, other: "Arc") -> bool:
        if self.left_closed != other.left_closed:
            raise ValueError("mixed closedness")
        a = frac(self.lo - other.lo)
        return a + self.length <= other.length

    def as_tuple(self):
        return (self.lo, self.hi, self.left_closed)


def critical_interval(table: ConvergentTable, n: int, convention: str = "asymmetric") -> Arc:
    w = table.absz(n) + table.absz(n + 1)
    if convention == "symmetric":
        b = w / 2
        return Arc(-b, b, True)
    if convention != "asymmetric":
        raise ValueError(convention)
    if n % 2 == 0:
        return Arc(Fraction(0), w, True)
    return Arc(Fraction(0), w, False)


def subintervals(table: ConvergentTable, n: int) -> dict[str, Arc]:
    """Tagged partition ``I0, I1..I{a}, I*`` of the asymmetric ``I_n``.

    ``a = a_{n+2}``. Even levels use left-closed arcs, odd levels right-closed.
    """
    table.check_level(n, 2)
    zn, z1, z2 = table.absz(n), table.absz(n + 1), table.absz(n + 2)
    a = table.a(n + 2)
    out: dict[str, Arc] = {}
    if n % 2 == 0:
        out["I0"] = Arc(Fraction(0), z1, True)
        for i in range(1, a + 1):
            out[f"I{i}"] = Arc(zn - (i - 1) * z1, zn - (i - 2) * z1, True)
        out["I*"] = Arc(z1, z1 + z2, True)
    else:
        out["I0"] = Arc(zn, zn + z1, False)
        for i in range(1, a + 1):
            out[f"I{i}"] = Arc((i - 1) * z1, i * z1, False)
        out["I*"] = Arc(zn - z2, zn, False)
    return out


def locate(x, table: ConvergentTable, n: int) -> str:
    """Tag of the piece holding ``x``, read off its offset in ``I_n``."""
    table.check_level(n, 2)
    zn, z1, z2 = table.absz(n), table.absz(n + 1), table.absz(n + 2)
    y = frac(x)
    if n % 2 == 0:
        if not y < zn + z1:
            raise DomainError(f"{x} is not in I_{n}")
        if y < z1:
            return "I0"
        if y < z1 + z2:
            return "I*"
        return f"I{math.ceil((zn - y) / z1) + 1}"
    if y == 0 or y > zn + z1:
        raise DomainError(f"{x} is not in I_{n}")
    if y > zn:
        return "I0"
    if y > zn - z2:
        return "I*"
    return f"I{math.ceil(y / z1)}"


def locate_scan(x, table: ConvergentTable, n: int) -> str:
    """Reference ``locate``: test every piece in turn."""
    for tag, arc in subintervals(table, n).items():
        if arc.contains(x):
            return tag
    raise DomainError(f"{x} is not in I_{n}")


def return_time_closed(x, table: ConvergentTable, n: int,
                       direction: str = "forward") -> tuple[int, str]:
    """Closed-form first return time to the asymmetric ``I_n``.

    Forward: ``q_n`` on ``I0`` and ``q_{n+1}`` elsewhere. Backward: ``q_n`` on
    ``I1`` (the forward image of ``I0``) and ``q_{n+1}`` elsewhere.
    """
    table.check_level(n, 3)
    tag = locate(x, table, n)
    fast = "I0" if direction == "forward" else "I1"
    if direction not in ("forward", "backward"):
        raise ValueError(direction)
    return (table.q[n] if tag == fast else table.q[n + 1]), tag


def window_return_time(x, table: ConvergentTable, n: int, window: Arc,
                       direction: str = "forward") -> int:
    """Return time to any arc of length ``|z_n| + |z_{n+1}|``.

    The first return is ``q_n`` when ``T^{+-q_n} x`` lands back in the arc and
    ``q_{n+1}`` otherwise.
    """
    if window.length != table.absz(n) + table.absz(n + 1):
        raise ValueError("window length must be |z_n| + |z_{n+1}|")
    if not window.contains(x):
        raise DomainError(f"{x} is not in the window")
    sgn = 1 if direction == "forward" else -1
    if window.contains(Fraction(x) + sgn * table.z[n]):
        return table.q[n]
    return table.q[n + 1]


# -- brute force ------------------------------------------------------------

def _common_denominator(values: Iterable[Fraction]) -> int:
    d = 1
    for v in values:
        d = d * v.denominator // math.gcd(d, v.denominator)
    return d


def brute_return_times(xs: Sequence, alpha: Fraction, arc: Arc,
                       direction: str = "forward", cap: int = 10**6,
                       start: int = 1) -> list[int]:
    """First ``j >= start`` with ``x +- j*alpha`` in ``arc``, for each ``x``.

    Iterates the rotation step by step on integer residues modulo a common
    denominator, so the answer is exact.
    """
    xs = [Fraction(x) for x in xs]
    if not xs:
        return []
    D = _common_denominator(xs + [alpha, arc.lo, arc.hi])
    A = int(alpha * D) % D
    if direction == "backward":
        A = (-A) % D
    elif direction != "forward":
        raise ValueError(direction)
    W = int(arc.length * D)
    lo = int(arc.lo * D)
    big = D >= 2**61
    dt = object if big else np.int64
    y = np.array([(int(x * D) - lo) % D for x in xs], dtype=dt)
    y = (y + (start * A) % D) % D
    out = np.full(len(xs), -1, dtype=np.int64)
    j = start
    remaining = np.arange(len(xs))
    while remaining.size:
        if j > cap:
            raise CapError(f"return time exceeds cap {cap}")
        yy = y[remaining]
        hit = (yy < W) if arc.left_closed else ((yy > 0) & (yy <= W))
        hit = np.asarray(hit, dtype=bool)
        if hit.any():
            out[remaining[hit]] = j
            remaining = remaining[~hit]
        y[remaining] = (y[remaining] + A) % D
        j += 1
    return [int(v) for v in out]


def return_time_brute(x, table: ConvergentTable, n: int, direction: str = "forward",
                      cap: int | None = None, arc: Arc | None = None) -> int:
    """Iterate until the first return to ``I_n`` (asymmetric unless ``arc``)."""
    arc = critical_interval(table, n) if arc is None else arc
    if not arc.contains(x):
        raise DomainError(f"{x} is not in the interval")
    if cap is None:
        cap = table.q[min(n + 2, table.M)] + table.q[n + 1]
    return brute_return_times([x], table.alpha, arc, direction, cap)[0]


def first_entry_time(x, table: ConvergentTable, n: int) -> int:
    """Least ``j >= 0`` with ``T^j x`` in the symmetric ``[-b_n, b_n)``."""
    arc = critical_interval(table, n, "symmetric")
    return brute_return_times([x], table.alpha, arc, "forward", table.q[n + 1], start=0)[0]


def first_entry_times(xs, table: ConvergentTable, n: int) -> list[int]:
    arc = critical_interval(table, n, "symmetric")
    return brute_return_times(xs, table.alpha, arc, "forward", table.q[n + 1], start=0)


def self_return_times(xs, table: ConvergentTable, n: int) -> list[int]:
    """Brute-force first return of points of ``I0`` to ``I0`` itself."""
    table.check_level(n, 3)
    i0 = subintervals(table, n)["I0"]
    cap = table.q[n + 2] + table.q[n + 1]
    return brute_return_times(xs, table.alpha, i0, "forward", cap)


# -- images of the return map -------------------------------------------------

@dataclass(frozen=True)
class ReturnMapImage:
    tag: str
    time: int
    image: Arc
    target: tuple[str, ...]
    holds: bool


def return_map_image(table: ConvergentTable, n: int, tag: str) -> ReturnMapImage:
    """Image of a tagged piece under its forward return time, checked exactly."""
    table.check_level(n, 3)
    parts = subintervals(table, n)
    a = table.a(n + 2)
    if tag not in parts:
        raise KeyError(tag)
    if tag == "I0":
        t, shift, target = table.q[n], table.z[n], ("I1",)
    else:
        t, shift = table.q[n + 1], table.z[n + 1]
        if tag == "I*":
            target = ("I0",)
        elif int(tag[1:]) < a:
            target = (f"I{int(tag[1:]) + 1}",)
        else:
            target = ("I*", "I0")
    image = parts[tag].shift(shift)
    if len(target) == 1:
        holds = image == parts[target[0]] if tag != "I*" else image.issubset(parts["I0"])
    else:
        lo = parts["I0"] if n % 2 == 0 else parts["I*"]
        hi = parts["I*"] if n % 2 == 0 else parts["I0"]
        union = Arc(lo.lo, hi.hi, lo.left_closed)
        holds = image.issubset(union)
    return ReturnMapImage(tag, t, image, target, bool(holds))


# -- three distance -----------------------------------------------------------

@dataclass(frozen=True)
class ThreeDistanceReport:
    n: int
    points: tuple[Fraction, ...]
    indices: tuple[int, ...]
    gaps: tuple[Fraction, ...]
    small: Fraction
    large: Fraction
    count_small: int
    count_large: int
    successor_ok: bool
    order_ok: bool

    @property
    def ok(self) -> bool:
        return (set(self.gaps) <= {self.small, self.large} and self.successor_ok
                and self.order_ok and self.count_small + self.count_large == len(self.gaps))


def three_distance(table: ConvergentTable, n: int) -> ThreeDistanceReport:
    """Sorted orbit ``{q alpha} : 0 <= q < q_{n+1}`` and its gaps.

    For even ``n`` the gap after the point of index ``q`` is ``|z_n|`` when
    ``q < q_{n+1} - q_n`` and ``|z_n| + |z_{n+1}|`` otherwise; odd levels use
    the gap before the point. The ``k``-th point from 0 has index
    ``(-1)^n k q_n mod q_{n+1}``.
    """
    if n + 1 > table.M - 1:
        raise ValueError("level too deep for this table")
    Q = table.alpha.denominator
    P = table.alpha.numerator
    qn, qn1 = table.q[n], table.q[n + 1]
    res = sorted(((k * P) % Q, k) for k in range(qn1))
    pts = tuple(Fraction(r, Q) for r, _ in res)
    idx = tuple(k for _, k in res)
    m = len(pts)
    gaps = tuple(frac(pts[(i + 1) % m] - pts[i]) if m > 1 else Fraction(1) for i in range(m))
    small = table.absz(n)
    large = small + table.absz(n + 1)
    ok = True
    for i, k in enumerate(idx):
        g = gaps[i] if n % 2 == 0 else gaps[i - 1]
        want = small if k < qn1 - qn else large
        ok &= g == want
    sgn = 1 if n % 2 == 0 else -1
    order_ok = all(idx[k] == (sgn * k * qn) % qn1 for k in range(m))
    return ThreeDistanceReport(n, pts, idx, gaps, small, large,
                               sum(g == small for g in gaps), sum(g == large for g in gaps),
                               ok, order_ok)


# -- samplers -----------------------------------------------------------------

def arc_samples(arc: Arc, k: int, include_endpoints: bool = True) -> list[Fraction]:
    """``k`` interior midpoints of equal cells plus the endpoints that belong."""
    pts = [frac(arc.lo + arc.length * Fraction(2 * i + 1, 2 * k)) for i in range(k)]
    if include_endpoints:
        pts.append(frac(arc.lo) if arc.left_closed else frac(arc.hi))
        # the point just inside the open end
        eps = arc.length / (4 * k * 1000)
        pts.append(frac(arc.hi - eps) if arc.left_closed else frac(arc.lo + eps))
    return pts


def symmetric_return_profile(table: ConvergentTable, n: int, k: int = 400) -> dict:
    """Brute-force return times on the symmetric ``[-b_n, b_n)``.

    Reports the set of values and whether the fast set is a single arc.
    """
    arc = critical_interval(table, n, "symmetric")
    xs = arc_samples(arc, k, include_endpoints=False)
    xs.insert(0, frac(arc.lo))
    out = {}
    for direction in ("forward", "backward"):
        times = brute_return_times(xs, table.alpha, arc, direction,
                                   table.q[n + 2] + table.q[n + 1])
        vals = sorted(set(times))
        fast = [t == table.q[n] for t in times]
        runs = sum(1 for i in range(len(fast)) if fast[i] and (i == 0 or not fast[i - 1]))
        out[direction] = {"values": vals, "fast_runs": runs,
                          "fast_fraction": sum(fast) / len(fast)}
    return out
