"""Quasi-periodic cocycles ``(T, A)`` over the rotation by the truncated frequency.

Orbit phases are computed as exact integer residues and converted to floats
only when the generator is evaluated. Long products go through ``kernels``.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import kernels
from .frequency import ConvergentTable
from .orbit import Arc, critical_interval, frac, window_return_time
from .sl2 import LogScaledMat2, svd_frame

MAX_STEPS = 10**7
CHUNK_CELLS = 2_000_000


class BudgetError(ValueError):
    """Iteration length beyond ``MAX_STEPS``."""


def default_workers() -> int:
    return max(1, int(os.environ.get("QPCOCYCLE_WORKERS", "1")))


# -- generators ---------------------------------------------------------------

@dataclass(frozen=True)
class RotHyp:
    """``A(x) = diag(lam, 1/lam) R_{pi/2 - phi(x)}``."""

    log_lambda: float
    phi: Callable

    def __post_init__(self):
        if not self.log_lambda > 0:
            raise ValueError("log_lambda must be positive")

    def psi(self, t: np.ndarray) -> np.ndarray:
        return math.pi / 2 - np.asarray(self.phi(t), dtype=float)

    def matrices(self, t: np.ndarray) -> np.ndarray:
        p = self.psi(t)
        lam = math.exp(self.log_lambda)
        c, s = np.cos(p), np.sin(p)
        return np.stack([lam * c, -lam * s, s / lam, c / lam], axis=-1)


@dataclass(frozen=True)
class Schrodinger:
    """``A(x) = [[E - v(x), -1], [1, 0]]``."""

    energy: float
    potential: Callable

    def matrices(self, t: np.ndarray) -> np.ndarray:
        w = self.energy - np.asarray(self.potential(t), dtype=float)
        one = np.ones_like(w)
        return np.stack([w, -one, one, 0 * one], axis=-1)


@dataclass(frozen=True)
class Constant:
    matrix: tuple

    def matrices(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t)
        return np.broadcast_to(np.asarray(self.matrix, float).reshape(4), t.shape + (4,)).copy()


@dataclass(frozen=True)
class CocycleSpec:
    table: ConvergentTable
    generator: object

    @property
    def alpha(self) -> Fraction:
        return self.table.alpha


# -- exact phases -------------------------------------------------------------

def orbit_phases(x, alpha: Fraction, start: int, count: int) -> np.ndarray:
    """Floats of ``frac(x + k alpha)`` for ``k = start .. start+count-1``."""
    x = Fraction(x)
    D = x.denominator * alpha.denominator // math.gcd(x.denominator, alpha.denominator)
    X = int(x * D) % D
    A = int(alpha * D) % D
    k = np.arange(start, start + count)
    if D * (abs(start) + count + 1) < 2**62:
        r = (X + k * A) % D
        return r.astype(float) / D
    r = [(X + int(kk) * A) % D for kk in k]
    return np.array([Fraction(v, D) for v in r], dtype=float)


def grid_phases(G: int, alpha: Fraction, rows: range, N: int, start: int = 0) -> np.ndarray:
    """Phases ``j/G + k alpha`` for ``j`` in ``rows`` and ``k = start..start+N-1``."""
    P, Q = alpha.numerator, alpha.denominator
    D = G * Q
    j = np.arange(rows.start, rows.stop)[:, None]
    k = np.arange(start, start + N)[None, :]
    if D * (abs(start) + N + 2) < 2**62:
        r = (j * Q + (k * P * G) % D) % D
        return r.astype(float) / D
    out = np.empty((len(rows), N))
    for a, jj in enumerate(rows):
        out[a] = orbit_phases(Fraction(jj, G), alpha, start, N)
    return out


def signed(t: np.ndarray) -> np.ndarray:
    """Representative in [-1/2, 1/2)."""
    t = np.asarray(t, dtype=float)
    return t - np.floor(t + 0.5)


# -- products -----------------------------------------------------------------

def _block(spec: CocycleSpec, x, start: int, count: int) -> LogScaledMat2:
    t = orbit_phases(x, spec.alpha, start, count)
    gen = spec.generator
    if isinstance(gen, RotHyp):
        m, e = kernels.rothyp_product(np.ascontiguousarray(gen.psi(t)), gen.log_lambda)
    else:
        m, e = kernels.general_product(np.ascontiguousarray(gen.matrices(t)))
    return LogScaledMat2.from_matrix(m, e)


def iterate(spec: CocycleSpec, x, n: int) -> LogScaledMat2:
    """``A^n(x)``: ``A(T^{n-1}x)..A(x)`` for ``n > 0``, ``(A^{-n}(T^n x))^{-1}`` for ``n < 0``."""
    if abs(n) > MAX_STEPS:
        raise BudgetError(f"|n| = {abs(n)} exceeds {MAX_STEPS}")
    if n == 0:
        return LogScaledMat2.identity()
    if n > 0:
        return _block(spec, x, 0, n)
    return _block(spec, x, n, -n).inverse()


def partial_log_norms(spec: CocycleSpec, x, n: int) -> np.ndarray:
    """``log ||A^i(x)||`` for ``i = 1..n``."""
    gen = spec.generator
    if not isinstance(gen, RotHyp):
        raise TypeError("partial log-norms need a RotHyp generator")
    t = orbit_phases(x, spec.alpha, 0, n)
    return kernels.rothyp_partial_lognorms(np.ascontiguousarray(gen.psi(t)), gen.log_lambda)


def _row_lognorms(spec: CocycleSpec, G: int, rows: range, N: int) -> np.ndarray:
    gen = spec.generator
    out = np.empty(len(rows))
    step = max(1, CHUNK_CELLS // max(N, 1))
    for a in range(0, len(rows), step):
        sub = range(rows.start + a, min(rows.stop, rows.start + a + step))
        t = grid_phases(G, spec.alpha, sub, N)
        if isinstance(gen, RotHyp):
            v = kernels.rothyp_lognorms(np.ascontiguousarray(gen.psi(t)), gen.log_lambda)
        else:
            v = kernels.general_lognorms(np.ascontiguousarray(gen.matrices(t)))
        out[a:a + len(sub)] = v
    return out


def grid_log_norms(spec: CocycleSpec, N: int, G: int, workers: int | None = None) -> np.ndarray:
    """``log ||A^N(j/G)||`` for ``j = 0..G-1``; identical for every worker count."""
    if N < 1 or N > MAX_STEPS:
        raise BudgetError("need 1 <= N <= 1e7")
    if G < 1:
        raise ValueError("grid must be positive")
    workers = default_workers() if workers is None else max(1, int(workers))
    bounds = np.linspace(0, G, min(workers, G) + 1).astype(int)
    parts = [range(int(bounds[i]), int(bounds[i + 1])) for i in range(len(bounds) - 1)]
    if len(parts) == 1:
        return _row_lognorms(spec, G, parts[0], N)
    with ThreadPoolExecutor(len(parts)) as pool:
        res = list(pool.map(lambda r: _row_lognorms(spec, G, r, N), parts))
    return np.concatenate(res)


@dataclass(frozen=True)
class FiniteLEEstimate:
    value: float
    stderr: float
    N: int
    G: int
    excluded_fraction: float = 0.0

    def to_dict(self):
        return {"value": self.value, "stderr": self.stderr, "N": self.N, "G": self.G,
                "excluded_fraction": self.excluded_fraction}


def _summarise(vals: np.ndarray, N: int, G: int, excluded: float = 0.0) -> FiniteLEEstimate:
    vals = [float(v) / N for v in vals]
    m = math.fsum(vals) / len(vals)
    if len(vals) > 1:
        var = math.fsum((v - m) ** 2 for v in vals) / (len(vals) - 1)
        se = math.sqrt(var / len(vals))
    else:
        se = math.inf
    return FiniteLEEstimate(m, se, N, G, excluded)


def finite_le(spec: CocycleSpec, N: int, G: int, workers: int | None = None) -> FiniteLEEstimate:
    """Grid mean of ``log ||A^N(x)|| / N`` over ``x = j/G``."""
    return _summarise(grid_log_norms(spec, N, G, workers), N, G)


def finite_le_excluding(spec: CocycleSpec, N: int, G: int, exclusion,
                        workers: int | None = None) -> FiniteLEEstimate:
    """As ``finite_le`` but skipping grid points inside ``exclusion``.

    ``exclusion`` needs a vectorised ``contains(t)``.
    """
    vals = grid_log_norms(spec, N, G, workers)
    keep = ~np.asarray(exclusion.contains(np.arange(G) / G), dtype=bool)
    if not keep.any():
        raise ValueError("exclusion covers the whole grid")
    return _summarise(vals[keep], N, G, 1.0 - keep.sum() / G)


# -- frame fields -------------------------------------------------------------

@dataclass(frozen=True)
class FrameSample:
    x: Fraction
    r_plus: int
    r_minus: int
    s_angle: float
    u_angle: float
    log_plus: float
    log_minus: float
    well_defined: bool


def return_times_symmetric(x, table: ConvergentTable, n: int) -> tuple[int, int]:
    arc = critical_interval(table, n, "symmetric")
    return (window_return_time(x, table, n, arc, "forward"),
            window_return_time(x, table, n, arc, "backward"))


def frame_at(spec: CocycleSpec, x, n: int) -> FrameSample:
    """``s(A^{r+}(x))`` and ``u(A^{r-}(T^{-r-} x))`` at a point of ``I_n``."""
    x = frac(x)
    rp, rm = return_times_symmetric(x, spec.table, n)
    fp = svd_frame(iterate(spec, x, rp))
    fm = svd_frame(iterate(spec, x, -rm))
    # u of the arriving block equals s of its inverse
    return FrameSample(x, rp, rm, fp.s_angle, fm.s_angle, fp.log_norm, fm.log_norm,
                       fp.well_defined and fm.well_defined)


def frame_fields(spec: CocycleSpec, n: int, samples) -> list[FrameSample]:
    """Frame fields at exact sample points of the symmetric ``I_n``.

    ``samples`` is a list of points or a count of equally spaced midpoints.
    """
    if isinstance(samples, int):
        arc = critical_interval(spec.table, n, "symmetric")
        samples = [arc.lo + arc.length * Fraction(2 * i + 1, 2 * samples) for i in range(samples)]
    return [frame_at(spec, x, n) for x in samples]
