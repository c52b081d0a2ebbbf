"""Truncated Gevrey seminorm from sampled derivatives."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_ORDER = 8


@dataclass(frozen=True)
class GevreySeminorm:
    value: float
    terms: tuple[float, ...]
    argmax: int
    k_max: int
    truncated: bool = True

    def to_dict(self):
        return {"value": self.value, "terms": list(self.terms), "argmax": self.argmax,
                "k_max": self.k_max, "label": "truncated"}


def gevrey_seminorm(f, s: float, K: float, k_max: int, grid: int = 4096) -> GevreySeminorm:
    """``(4 pi^2 / 3) max_k (1+k)^2 ||f^(k)||_inf / (K^k (k!)^s)`` for ``k <= k_max``.

    ``f`` needs ``jet(t, order)`` returning derivatives ``0..order`` (period 1).
    Sup norms are taken over ``grid`` equally spaced points.
    """
    if not 0 <= k_max <= MAX_ORDER:
        raise ValueError(f"derivatives available up to order {MAX_ORDER}")
    if not hasattr(f, "jet"):
        raise TypeError("f must provide jet(t, order)")
    t = np.arange(grid) / grid
    d = f.jet(t, k_max)
    terms = []
    for k in range(k_max + 1):
        sup = float(np.max(np.abs(d[k])))
        terms.append((1 + k) ** 2 * sup / (K ** k * math.factorial(k) ** s))
    c = 4 * math.pi ** 2 / 3
    i = int(np.argmax(terms))
    return GevreySeminorm(c * terms[i], tuple(c * v for v in terms), i, k_max)
