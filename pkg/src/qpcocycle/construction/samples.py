"""Sample angle functions on the unit circle and the cut-off bump.

All functions take the phase ``t`` (period 1) and work internally with
``y = 2 pi t`` so that their shapes match the usual 2 pi-periodic forms.
``jet(t, K)`` returns derivatives of order ``0..K`` with respect to ``t``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .jets import Jet

TWO_PI = 2 * math.pi


def _signed(t):
    t = np.asarray(t, dtype=float)
    return t - np.floor(t + 0.5)


def _g(u: Jet, nu: float = 2.0) -> Jet:
    """``exp(-u^{-1/(nu-1)})`` on ``u > 0``."""
    return (-(u ** (-1.0 / (nu - 1.0)))).exp()


def smoothstep_jet(u: Jet, nu: float = 2.0) -> Jet:
    """Flat-ended step: 0 for ``u <= 0``, 1 for ``u >= 1``."""
    u0 = u.c[0]
    out = np.zeros_like(u.c)
    out[0] = np.where(u0 >= 1, 1.0, 0.0)
    mid = (u0 > 0) & (u0 < 1)
    if mid.any():
        v = Jet(u.c[:, mid])
        a, b = _g(v, nu), _g(1 - v, nu)
        out[:, mid] = (a / (a + b)).c
    return Jet(out)


class SampleFunction:
    """Base class; subclasses implement ``_jet`` on masked points."""

    name = "sample"

    def jet(self, t, order: int) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return self._jet(t, order).derivatives()

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.jet(t.ravel(), 0)[0].reshape(t.shape)

    def derivative(self, t, k: int):
        if not 0 <= k <= 8:
            raise ValueError("derivative order must lie in 0..8")
        t = np.asarray(t, dtype=float)
        return self.jet(t.ravel(), k)[k].reshape(t.shape)

    def params(self) -> dict:
        return {}


@dataclass
class ClSample(SampleFunction):
    """``(2 pi |t|)^{l+1}`` near 0, blended to a constant plateau.

    Blend runs over ``delta0 <= y <= ramp_end`` with a flat-ended step, so the
    function is smooth away from ``t = 0`` and exactly ``C^l`` there.
    """

    l: int = 1
    delta0: float = 0.3
    ramp_end: float = 1.0
    plateau: float = math.pi / 4
    name = "Cl"

    def __post_init__(self):
        if self.l < 1:
            raise ValueError("l must be >= 1")
        if not 0 < self.delta0 < self.ramp_end < math.pi:
            raise ValueError("need 0 < delta0 < ramp_end < pi")
        if self.ramp_end ** (self.l + 1) >= math.pi / 2 or not \
                self.delta0 ** (self.l + 1) < self.plateau < math.pi / 2:
            raise ValueError("blend would leave (delta0^{l+1}, pi/2)")

    def _jet(self, t, order):
        s = _signed(t)
        sgn = np.where(s < 0, -1.0, 1.0)
        y = Jet.variable(s, order) * (TWO_PI * sgn)
        p = y ** (self.l + 1)
        u = (y - self.delta0) / (self.ramp_end - self.delta0)
        chi = smoothstep_jet(u)
        return p + chi * (self.plateau - p)

    def params(self):
        return {"l": self.l, "delta0": self.delta0, "ramp_end": self.ramp_end,
                "plateau": self.plateau}


@dataclass
class CinfSample(SampleFunction):
    """``exp(-(log(8 pi / y))^sigma - (log(8 pi / (2 pi - y)))^sigma)``."""

    sigma: float = 2.0
    name = "Cinf"

    def __post_init__(self):
        if not self.sigma > 1:
            raise ValueError("sigma must be > 1")

    def _jet(self, t, order):
        t = np.asarray(t) - np.floor(t)
        out = np.zeros((order + 1,) + t.shape)
        pos = t > 0
        if pos.any():
            y = Jet.variable(t[pos], order) * TWO_PI
            a = (8 * math.pi / y).log() ** self.sigma
            b = (8 * math.pi / (TWO_PI - y)).log() ** self.sigma
            out[:, pos] = (-(a + b)).exp().c
        return Jet(out)

    def params(self):
        return {"sigma": self.sigma}


@dataclass
class GevreySample(SampleFunction):
    """``exp(-y^{-1/(s-1)} - (2 pi - y)^{-1/(s-1)})``."""

    s: float = 2.0
    name = "Gevrey"

    def __post_init__(self):
        if not self.s > 1:
            raise ValueError("s must be > 1")

    def _jet(self, t, order):
        t = np.asarray(t) - np.floor(t)
        out = np.zeros((order + 1,) + t.shape)
        pos = t > 0
        if pos.any():
            y = Jet.variable(t[pos], order) * TWO_PI
            k = -1.0 / (self.s - 1)
            out[:, pos] = (-(y ** k) - (TWO_PI - y) ** k).exp().c
        return Jet(out)

    def params(self):
        return {"s": self.s}


@dataclass
class ConstantSample(SampleFunction):
    value: float = 0.0
    name = "constant"

    def _jet(self, t, order):
        c = np.zeros((order + 1,) + np.shape(t))
        c[0] = self.value
        return Jet(c)


def make_sample(cls: str, params: dict | None = None) -> SampleFunction:
    params = dict(params or {})
    kinds = {"Cl": ClSample, "Cinf": CinfSample, "Gevrey": GevreySample,
             "constant": ConstantSample}
    if cls not in kinds:
        raise ValueError(f"unknown class {cls!r}")
    return kinds[cls](**params)


@dataclass
class Bump(SampleFunction):
    """Cut-off equal to 1 on ``|t| <= b/10`` and 0 on ``|t| >= b/5``.

    Built as ``w(10 |t| / b)`` with ``w(v) = g(2 - v) / (g(2 - v) + g(v - 1))``
    and ``g(x) = exp(-x^{-1/(nu-1)})``.
    """

    b: float = 0.1
    nu: float = 2.0
    name = "bump"

    def _jet(self, t, order):
        s = _signed(t)
        sgn = np.where(s < 0, -1.0, 1.0)
        v = Jet.variable(s, order) * (10.0 * sgn / self.b)
        # 1 - step(v - 1): flat at both ends
        return 1 - smoothstep_jet(v - 1, self.nu)

    def support_mask(self, t):
        return np.abs(_signed(t)) < self.b / 5
