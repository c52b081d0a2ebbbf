"""2x2 matrix toolkit: log-scaled products, singular frames and product lemmas.

A ``LogScaledMat2`` stores ``2**exponent * unit`` with ``||unit||`` in [1, 2).
Rescaling by powers of two is exact, so long products never overflow and
their log-norm is ``exponent * log 2 + log ||unit||``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

LN2 = math.log(2.0)
FRAME_FLOOR = math.log(10.0)


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def diag(lam: float) -> np.ndarray:
    return np.array([[lam, 0.0], [0.0, 1.0 / lam]])


def _sigma_max(m: np.ndarray) -> float:
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    q = math.hypot(a + d, c - b) / 2
    r = math.hypot(a - d, c + b) / 2
    return q + r


@dataclass(frozen=True)
class LogScaledMat2:
    unit: np.ndarray
    exponent: int = 0

    @classmethod
    def from_matrix(cls, m, exponent: int = 0) -> "LogScaledMat2":
        m = np.array(m, dtype=float).reshape(2, 2)
        s = _sigma_max(m)
        if s == 0 or not math.isfinite(s):
            raise ValueError("matrix must be finite and nonzero")
        _, k = math.frexp(s)  # s = f * 2**k, f in [0.5, 1)
        return cls(np.ldexp(m, 1 - k), exponent + k - 1)

    @classmethod
    def identity(cls) -> "LogScaledMat2":
        return cls(np.eye(2), 0)

    @property
    def logscale(self) -> float:
        return self.exponent * LN2

    def log_norm(self) -> float:
        return self.logscale + math.log(_sigma_max(self.unit))

    def matrix(self) -> np.ndarray:
        return np.ldexp(self.unit, self.exponent)

    def inverse(self) -> "LogScaledMat2":
        # SL(2): (2^e U)^{-1} = 2^{-e} U^{-1} = 2^{e} adj(U) since det U = 4^{-e}
        u = self.unit
        adj = np.array([[u[1, 1], -u[0, 1]], [-u[1, 0], u[0, 0]]])
        return LogScaledMat2(adj, self.exponent)

    def __matmul__(self, other: "LogScaledMat2") -> "LogScaledMat2":
        return compose(self, other)


def compose(b: LogScaledMat2, a: LogScaledMat2) -> LogScaledMat2:
    """The product ``B A``, renormalised."""
    return LogScaledMat2.from_matrix(b.unit @ a.unit, b.exponent + a.exponent)


def product(mats) -> LogScaledMat2:
    """``M_{k-1} ... M_1 M_0`` for a sequence listed in time order."""
    out = LogScaledMat2.identity()
    for m in mats:
        if not isinstance(m, LogScaledMat2):
            m = LogScaledMat2.from_matrix(m)
        out = compose(m, out)
    return out


@dataclass(frozen=True)
class FrameDecomp:
    """``A = R_u diag(e^l, e^-l) R_{pi/2 - s}``.

    ``s_angle`` is the most contracted input direction and ``u_angle`` the most
    expanded output direction, both in [0, pi). Reducing both angles mod pi
    can flip the overall sign, which ``sign`` records.
    """

    u_angle: float
    log_norm: float
    s_angle: float
    well_defined: bool
    sign: int = 1


def _as_lsm(a) -> LogScaledMat2:
    return a if isinstance(a, LogScaledMat2) else LogScaledMat2.from_matrix(a)


def _wrap_pi(x: float) -> tuple[float, int]:
    """``(x - k pi, k)`` with the first entry in [0, pi); rounding can land on pi."""
    k = math.floor(x / math.pi)
    r = x - k * math.pi
    if r >= math.pi:
        r, k = r - math.pi, k + 1
    elif r < 0:
        r, k = r + math.pi, k - 1
    return r, k


def svd_frame(a, frame_floor: float = FRAME_FLOOR) -> FrameDecomp:
    """Closed-form singular frame of an SL(2, R) matrix.

    Angles come from ``atan2`` of symmetric/antisymmetric parts, which keeps
    them accurate even when the contracted singular value underflows.
    """
    a = _as_lsm(a)
    m = a.unit
    e, f = (m[0, 0] + m[1, 1]) / 2, (m[0, 0] - m[1, 1]) / 2
    g, h = (m[1, 0] + m[0, 1]) / 2, (m[1, 0] - m[0, 1]) / 2
    q, r = math.hypot(e, h), math.hypot(f, g)
    a1, a2 = math.atan2(g, f), math.atan2(h, e)
    theta, phi = (a2 - a1) / 2, (a2 + a1) / 2
    ell = a.logscale + math.log(q + r)
    s_raw = math.pi / 2 - theta
    u, ku = _wrap_pi(phi)
    s, ks = _wrap_pi(s_raw)
    return FrameDecomp(u, ell, s, ell >= frame_floor, -1 if (ku + ks) % 2 else 1)


def reconstruct(fr: FrameDecomp) -> np.ndarray:
    lam = math.exp(fr.log_norm)
    return fr.sign * (rotation(fr.u_angle) @ diag(lam) @ rotation(math.pi / 2 - fr.s_angle))


def reduce_angle(d: float) -> float:
    """Representative of ``d`` modulo pi in (-pi/2, pi/2]."""
    r = math.fmod(d, math.pi)
    if r > math.pi / 2:
        r -= math.pi
    elif r <= -math.pi / 2:
        r += math.pi
    return r


def rp1_distance(a: float, b: float) -> float:
    return abs(reduce_angle(a - b))


def angle_between(prev: FrameDecomp, nxt: FrameDecomp) -> float:
    """Signed angle ``s(next) - u(prev)`` in (-pi/2, pi/2]."""
    return reduce_angle(nxt.s_angle - prev.u_angle)


def from_frame(u: float, log_norm: float, s: float) -> LogScaledMat2:
    """Build ``R_u diag(e^l, e^-l) R_{pi/2-s}`` without overflow."""
    k = int(math.floor(log_norm / LN2))
    rest = log_norm - k * LN2
    lam = math.exp(rest)
    core = rotation(u) @ np.array([[lam, 0.0], [0.0, math.exp(-log_norm - k * LN2)]]) \
        @ rotation(math.pi / 2 - s)
    return LogScaledMat2.from_matrix(core, k)


# -- product lemmas ---------------------------------------------------------

@dataclass(frozen=True)
class NonresonantReport:
    theta: float
    e0: float
    precondition: bool
    log_norm: float
    predicted_log_norm: float
    norm_error: float
    norm_bound: float
    s_drift: float
    s_bound: float
    u_drift: float
    u_bound: float

    @property
    def holds(self) -> bool:
        return (self.norm_error <= self.norm_bound and self.s_drift <= self.s_bound
                and self.u_drift <= self.u_bound)


def nonresonant_product_check(e1, e2, eta: float, constant: float = 10.0) -> NonresonantReport:
    """Compare ``||E2 E1||`` with ``||E1|| ||E2|| |sin theta|``.

    ``theta = s(E2) - u(E1)``. Frames of the product must stay within
    ``||E1||^{-7/4}`` (contracting side) and ``||E2||^{-7/4}`` (expanding side).
    The norm error is evaluated as ``P * expm1(log e3 - log P)`` so that only
    the relative rounding of the logs enters.
    """
    if not 0 < eta < 0.01:
        raise ValueError("eta must lie in (0, 0.01)")
    e1, e2 = _as_lsm(e1), _as_lsm(e2)
    f1, f2 = svd_frame(e1), svd_frame(e2)
    f3 = svd_frame(compose(e2, e1))
    theta = angle_between(f1, f2)
    l0 = min(f1.log_norm, f2.log_norm)
    e0 = math.exp(l0)
    pre = abs(theta) >= math.exp(-eta * l0)
    pred = f1.log_norm + f2.log_norm + math.log(abs(math.sin(theta)))
    err = abs(math.exp(pred) * math.expm1(f3.log_norm - pred))
    return NonresonantReport(
        theta, e0, pre, f3.log_norm, pred, err, constant * math.exp(-0.5 * l0),
        rp1_distance(f3.s_angle, f1.s_angle), math.exp(-1.75 * f1.log_norm),
        rp1_distance(f3.u_angle, f2.u_angle), math.exp(-1.75 * f2.log_norm))


@dataclass(frozen=True)
class ResonantReport:
    misalignment: float
    log_norm: float
    log_bound: float

    @property
    def holds(self) -> bool:
        return self.log_norm <= self.log_bound + 1e-12


def resonant_cancellation_check(a, b) -> ResonantReport:
    """``||B A|| <= 2 max(||A||/||B||, ||B||/||A||)`` when ``u(A) = s(B)``.

    Works in the log domain; ``misalignment`` reports ``s(B) - u(A)``.
    """
    a, b = _as_lsm(a), _as_lsm(b)
    fa, fb = svd_frame(a), svd_frame(b)
    prod = svd_frame(compose(b, a))
    bound = LN2 + abs(fa.log_norm - fb.log_norm)
    return ResonantReport(angle_between(fa, fb), prod.log_norm, bound)


@dataclass(frozen=True)
class HyperbolicityReport:
    passes: bool
    worst_ratio: float
    fail_index: int | None
    direction: str | None
    max_step_log_norm: float


def check_mu_hyperbolic(blocks, mu: float, lam: float, eps: float,
                        rtol: float = 1e-12) -> HyperbolicityReport:
    """Check a sequence ``A_0..A_{n-1}`` for ``mu``-hyperbolicity.

    Needs ``||A_i|| <= lam`` and ``||A^i|| >= mu^{i(1-eps)}`` for the forward
    partial products ``A^i = A_{i-1}..A_0`` and for the backward ones built
    from ``A_{n-1}^{-1}, A_{n-2}^{-1}, ...``. ``worst_ratio`` is the smallest
    ``log||A^i|| / (i (1-eps) log mu)`` over both directions.
    """
    if not (1 < mu <= lam) or not (0 <= eps <= 1):
        raise ValueError("need 1 < mu <= lam and 0 <= eps <= 1")
    mats = [_as_lsm(m) for m in blocks]
    step = max((m.log_norm() for m in mats), default=0.0)
    rate = (1 - eps) * math.log(mu)
    worst, where, direction = math.inf, None, None
    for name, seq in (("forward", mats), ("backward", [m.inverse() for m in reversed(mats)])):
        acc = LogScaledMat2.identity()
        for i, m in enumerate(seq, start=1):
            acc = compose(m, acc)
            if rate <= 0:
                continue
            ratio = acc.log_norm() / (i * rate)
            if ratio < worst:
                worst, where, direction = ratio, i, name
    ok = step <= math.log(lam) * (1 + rtol) + 1e-12 and worst >= 1 - rtol
    fail = None if ok else where
    return HyperbolicityReport(ok, worst, fail, None if ok else direction, step)


# -- combinatorial identity -------------------------------------------------

def multiplicity_partitions(n: int):
    """All ``(k_1..k_n)`` with ``sum i k_i = n``."""
    def rec(i, left):
        if i > n:
            if left == 0:
                yield ()
            return
        for k in range(left // i + 1):
            for rest in rec(i + 1, left - i * k):
                yield (k,) + rest
    yield from rec(1, n)


def faa_di_bruno_partition_sum(n: int, r) -> Fraction:
    """``sum k!/(k_1!..k_n!) R^k`` over partitions, ``k = sum k_i``; exact."""
    if not 1 <= n <= 20:
        raise ValueError("n must lie in 1..20")
    r = Fraction(r)
    total = Fraction(0)
    for ks in multiplicity_partitions(n):
        k = sum(ks)
        coef = factorial(k)
        for ki in ks:
            coef //= factorial(ki)
        total += coef * r ** k
    return total


def faa_di_bruno_closed(n: int, r) -> Fraction:
    r = Fraction(r)
    return r * (1 + r) ** (n - 1)


# -- derivative drift (finite differences) --------------------------------------

@dataclass(frozen=True)
class DriftReport:
    x: float
    derivatives: dict
    inconclusive: bool


def _richardson(f, x, h, k):
    def d(hh):
        if k == 1:
            return (f(x + hh) - f(x - hh)) / (2 * hh)
        return (f(x + hh) - 2 * f(x) + f(x - hh)) / hh ** 2
    d1, d2 = d(h), d(h / 2)
    best = (4 * d2 - d1) / 3
    spread = abs(d2 - d1) / max(abs(best), 1e-300)
    return best, spread


def derivative_drift_check(e1_of_x, e2_of_x, x: float, eta: float = 0.005,
                           h: float = 1e-4) -> DriftReport:
    """Finite-difference derivatives (orders 1, 2) of ``log||E2 E1||`` and frames.

    Each estimate uses Richardson extrapolation over ``h, h/2``; if the two
    differ by more than 10% the run is flagged inconclusive. Reported for each
    order: measured size and the growth bound ``||E3||^{k eta}``.
    """
    def fields(t):
        a, b = _as_lsm(e1_of_x(t)), _as_lsm(e2_of_x(t))
        f3 = svd_frame(compose(b, a))
        return f3.log_norm, f3.u_angle, f3.s_angle
    base = fields(x)
    out, bad = {}, False
    names = ("log_norm", "u_angle", "s_angle")
    for j, name in enumerate(names):
        for k in (1, 2):
            val, spread = _richardson(lambda t: fields(t)[j], x, h, k)
            bad |= spread > 0.1 and abs(val) > 1e-8
            out[f"d{k}_{name}"] = val
    out["log_norm"] = base[0]
    out["growth_bound_1"] = eta * base[0]
    return DriftReport(x, out, bad)


# -- randomized lemma trials (CLI) ---------------------------------------------

def random_frame_matrix(rng: np.random.Generator, log_lo: float, log_hi: float) -> LogScaledMat2:
    u, s = rng.uniform(0, math.pi, 2)
    return from_frame(u, rng.uniform(log_lo, log_hi), s)


def run_lemma_trials(lemma: str, trials: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    violations, worst = 0, None
    if lemma == "basic":
        eta = 0.009
        for _ in range(trials):
            a = random_frame_matrix(rng, math.log(1e4), math.log(1e6))
            b_u = rng.uniform(0, math.pi)
            fa = svd_frame(a)
            lo = math.exp(-eta * math.log(1e4))
            th = rng.choice([-1, 1]) * rng.uniform(lo, math.pi / 2)
            b = from_frame(b_u, rng.uniform(math.log(1e4), math.log(1e6)), fa.u_angle + th)
            rep = nonresonant_product_check(a, b, eta)
            score = max(rep.norm_error / rep.norm_bound, rep.s_drift / rep.s_bound,
                        rep.u_drift / rep.u_bound)
            violations += not rep.holds
            worst = score if worst is None else max(worst, score)
    elif lemma == "resonant":
        for _ in range(trials):
            a = random_frame_matrix(rng, math.log(1e2), math.log(1e8))
            fa = svd_frame(a)
            b = from_frame(rng.uniform(0, math.pi), rng.uniform(math.log(1e2), math.log(1e8)),
                           fa.u_angle)
            rep = resonant_cancellation_check(a, b)
            violations += not rep.holds
            score = rep.log_norm - rep.log_bound
            worst = score if worst is None else max(worst, score)
    elif lemma == "hyperbolic":
        for _ in range(trials):
            mu = float(rng.uniform(2, 50))
            k = int(rng.integers(2, 40))
            blocks = [diag(mu)] * k
            rep = check_mu_hyperbolic(blocks, mu, mu, 0.0)
            violations += not rep.passes
            worst = rep.worst_ratio if worst is None else min(worst, rep.worst_ratio)
    elif lemma == "faa":
        for _ in range(trials):
            n = int(rng.integers(1, 13))
            r = Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 5)))
            ok = faa_di_bruno_partition_sum(n, r) == faa_di_bruno_closed(n, r)
            violations += not ok
        worst = 0
    else:
        raise ValueError(f"unknown lemma {lemma!r}")
    return {"lemma": lemma, "trials": trials, "violations": violations,
            "worst_case": worst}
