"""Exceptional set: backward-shifted balls around the zero, as exact arcs."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..frequency import ConvergentTable


@dataclass(frozen=True)
class ExceptionalSet:
    """Union of open balls ``B(0, q_{n+1}^{-2}) - k alpha`` for ``1 <= k <= [q_{n+1}^{3/2}]``.

    ``intervals`` are disjoint open ``(lo, hi)`` pairs inside [0, 1], sorted.
    A ball straddling 0 is split in two, and ``covers_zero`` records that the
    cut point itself belongs to the set.
    """

    n: int
    radius: Fraction
    count: int
    intervals: tuple[tuple[Fraction, Fraction], ...]
    covers_zero: bool = False

    @property
    def measure(self) -> Fraction:
        return sum((hi - lo for lo, hi in self.intervals), Fraction(0))

    @property
    def measure_bound(self) -> Fraction:
        return 2 * self.count * self.radius

    def contains(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        t = t - np.floor(t)
        lo = np.array([float(a) for a, _ in self.intervals])
        hi = np.array([float(b) for _, b in self.intervals])
        i = np.searchsorted(lo, t, side="right") - 1
        ok = i >= 0
        ic = np.clip(i, 0, None)
        return (ok & (t > lo[ic]) & (t < hi[ic])) | (self.covers_zero & (t == 0))

    def contains_exact(self, x) -> bool:
        x = Fraction(x) % 1
        return (self.covers_zero and x == 0) or any(lo < x < hi for lo, hi in self.intervals)

    def to_dict(self) -> dict:
        return {"n": self.n, "radius": str(self.radius), "count": self.count,
                "intervals": [[str(a), str(b)] for a, b in self.intervals],
                "covers_zero": self.covers_zero, "measure": str(self.measure)}


def exceptional_set(table: ConvergentTable, n: int, count: int | None = None) -> ExceptionalSet:
    """``count`` overrides the number of shifted balls (default ``[q_{n+1}^{3/2}]``)."""
    table.check_level(n, 1)
    qn1 = table.q[n + 1]
    r = Fraction(1, qn1 * qn1)
    if count is None:
        count = math.isqrt(qn1 ** 3)  # floor(q^{3/2})
    if 2 * r >= 1:
        return ExceptionalSet(n, r, count, ((Fraction(0), Fraction(1)),), True)
    pieces = []
    zero = False
    for k in range(1, count + 1):
        c = (-k * table.alpha) % 1
        lo, hi = c - r, c + r
        if lo < 0 or hi > 1:
            zero = True
        if lo < 0:
            pieces += [(lo + 1, Fraction(1)), (Fraction(0), hi)]
        elif hi > 1:
            pieces += [(lo, Fraction(1)), (Fraction(0), hi - 1)]
        else:
            pieces.append((lo, hi))
    pieces.sort()
    merged: list[list[Fraction]] = []
    for lo, hi in pieces:
        # open balls: touching ends leave the shared point out, keep them apart
        if merged and lo < merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return ExceptionalSet(n, r, count, tuple((a, b) for a, b in merged), zero)
