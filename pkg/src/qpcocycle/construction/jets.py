"""Truncated Taylor arithmetic, vectorised over sample points.

``Jet.c[k]`` holds ``f^(k)(t) / k!``. Only the operations the sample
functions need are provided.
"""
from __future__ import annotations

from math import factorial

import numpy as np


class Jet:
    __slots__ = ("c",)

    def __init__(self, c):
        self.c = np.asarray(c, dtype=float)

    @property
    def order(self) -> int:
        return self.c.shape[0] - 1

    @classmethod
    def variable(cls, t, order: int) -> "Jet":
        t = np.asarray(t, dtype=float)
        c = np.zeros((order + 1,) + t.shape)
        c[0] = t
        if order:
            c[1] = 1.0
        return cls(c)

    def _lift(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        c = np.zeros_like(self.c)
        c[0] = other
        return Jet(c)

    def __add__(self, other):
        return Jet(self.c + self._lift(other).c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __sub__(self, other):
        return Jet(self.c - self._lift(other).c)

    def __rsub__(self, other):
        return Jet(self._lift(other).c - self.c)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c * other)
        a, b = self.c, other.c
        out = np.zeros_like(a)
        for k in range(a.shape[0]):
            out[k] = sum(a[j] * b[k - j] for j in range(k + 1))
        return Jet(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c / other)
        a, d = self.c, other.c
        out = np.zeros_like(a)
        for k in range(a.shape[0]):
            out[k] = (a[k] - sum(d[j] * out[k - j] for j in range(1, k + 1))) / d[0]
        return Jet(out)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def exp(self) -> "Jet":
        a = self.c
        out = np.zeros_like(a)
        out[0] = np.exp(a[0])
        for k in range(1, a.shape[0]):
            out[k] = sum(j * a[j] * out[k - j] for j in range(1, k + 1)) / k
        return Jet(out)

    def log(self) -> "Jet":
        a = self.c
        out = np.zeros_like(a)
        out[0] = np.log(a[0])
        for k in range(1, a.shape[0]):
            acc = a[k] - sum(j * out[j] * a[k - j] for j in range(1, k)) / k
            out[k] = acc / a[0]
        return Jet(out)

    def __pow__(self, p):
        if isinstance(p, int) and p >= 0:
            out = self._lift(1.0)
            for _ in range(p):
                out = out * self
            return out
        return (self.log() * float(p)).exp()

    def derivatives(self) -> np.ndarray:
        """Array of ``f^(k)``, ``k = 0..order``."""
        fac = np.array([factorial(k) for k in range(self.order + 1)], dtype=float)
        return self.c * fac.reshape((-1,) + (1,) * (self.c.ndim - 1))
