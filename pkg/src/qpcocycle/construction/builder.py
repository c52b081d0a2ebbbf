"""Inductive correction of the angle function near its zero.

Level ``n`` adds ``e_hat_n = -f_n * d_n`` where ``f_n`` is the cut-off bump of
the symmetric ``I_n`` and ``d_n = (s_bar - u_bar) - phi_0`` is the mismatch of
the frame fields of the previous cocycle. Right-multiplying ``A(x)`` by a
rotation moves ``s`` and leaves ``u`` alone, so afterwards
``s_n - u_n = phi_0`` on ``I_n/10``. The resonant step instead adds
``-f_n * (s_n - u_n)`` which forces ``s = u`` there.

``d_n`` is sampled on exact nodes and stored as a cubic spline; the bump is
evaluated in closed form, so corrections vanish bit-for-bit off ``I_n/5``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.interpolate import CubicSpline

from ..cocycle import CocycleSpec, RotHyp, frame_at, iterate, orbit_phases, signed
from ..frequency import ConvergentTable
from ..sl2 import LogScaledMat2, check_mu_hyperbolic, compose, reduce_angle, rotation
from .samples import Bump, SampleFunction
from .schedule import LambdaSchedule


class StepRejected(RuntimeError):
    """A step failed verification; ``report`` carries the diagnostics."""

    def __init__(self, message: str, report: "StepReport"):
        super().__init__(message)
        self.report = report


@dataclass
class StepOptions:
    nodes: int = 81
    verify_samples: int = 100
    tol_angle: float = 1e-6
    tol_resonance: float = 1e-8
    eps_hyp: float = 0.1
    nu: float = 2.0
    refine: bool = True


@dataclass
class Correction:
    """``-f(t) * (weight * phi_0(t) + S(t))`` supported on ``|t| < b/5``."""

    level: int
    kind: str
    b: Fraction
    nodes: np.ndarray
    values: np.ndarray
    weight: float
    nu: float = 2.0

    def __post_init__(self):
        self.bump = Bump(float(self.b), self.nu)
        self.spline = CubicSpline(self.nodes, self.values)

    def apply(self, t: np.ndarray, base: SampleFunction, out: np.ndarray) -> None:
        s = signed(t)
        mask = np.abs(s) < float(self.b) / 5
        if not mask.any():
            return
        ts = s[mask]
        inner = self.spline(ts)
        if self.weight:
            inner = inner + self.weight * base(ts)
        out[mask] += -self.bump(ts) * inner

    def __call__(self, t, base: SampleFunction) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        self.apply(t, base, out)
        return out

    def to_dict(self) -> dict:
        return {"level": self.level, "kind": self.kind, "b": str(self.b),
                "weight": self.weight, "nu": self.nu,
                "knots": [float(v) for v in self.nodes],
                "values": [float(v) for v in self.values]}


class PhiField:
    """``phi_0`` plus a list of corrections, evaluated pointwise."""

    def __init__(self, base: SampleFunction, corrections: list[Correction]):
        self.base = base
        self.corrections = list(corrections)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.array(self.base(t), dtype=float)
        for c in self.corrections:
            c.apply(t, self.base, out)
        return out


@dataclass
class StepReport:
    level: int
    kind: str
    accepted: bool = False
    mu_log: float = 0.0
    angle_residual: float = math.nan
    lower_bound_ok: bool = False
    lower_bound_worst: float = math.nan
    hyperbolic: bool = False
    hyper_worst_ratio: float = math.nan
    hyper_witness: str | None = None
    support_ok: bool = False
    identity_residual: float = math.nan
    correction_sup: float = math.nan
    smallness_constant: float = math.nan
    refinement_error: float | None = None
    return_times: tuple[int, int] = (0, 0)
    reasons: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


class CorrectionLedger:
    """Ordered record of all steps over one base cocycle."""

    def __init__(self, table: ConvergentTable, base: SampleFunction,
                 log_lambda: float, schedule: LambdaSchedule):
        self.table = table
        self.base = base
        self.log_lambda = log_lambda
        self.schedule = schedule
        self.hats: dict[int, Correction] = {}
        self.tildes: dict[int, Correction] = {}
        self.reports: list[StepReport] = []

    def phi(self, level: int | None = None, tilde: bool = False) -> PhiField:
        """``phi_level`` (all hat corrections up to ``level``), plus ``e~_level`` if asked."""
        lv = max(self.hats, default=0) if level is None else level
        cs = [self.hats[k] for k in sorted(self.hats) if k <= lv]
        if tilde:
            if lv not in self.tildes:
                raise KeyError(f"no resonant step at level {lv}")
            cs.append(self.tildes[lv])
        return PhiField(self.base, cs)

    def spec(self, level: int | None = None, tilde: bool = False) -> CocycleSpec:
        return CocycleSpec(self.table, RotHyp(self.log_lambda, self.phi(level, tilde)))

    def to_dict(self) -> dict:
        return {"log_lambda": self.log_lambda, "sample": self.base.name,
                "sample_params": self.base.params(),
                "schedule": self.schedule.to_dict(),
                "hats": [self.hats[k].to_dict() for k in sorted(self.hats)],
                "tildes": [self.tildes[k].to_dict() for k in sorted(self.tildes)],
                "reports": [r.to_dict() for r in self.reports]}


# -- sampling helpers ---------------------------------------------------------

def _nodes(b: Fraction, k: int) -> list[Fraction]:
    """``k`` equally spaced exact nodes covering ``[-b/5, b/5]``."""
    w = b / 5
    return [-w + 2 * w * Fraction(i, k - 1) for i in range(k)]


def _frame_gap(spec: CocycleSpec, x: Fraction, n: int):
    fs = frame_at(spec, x, n)
    return reduce_angle(fs.s_angle - fs.u_angle), fs


def _mismatch(spec: CocycleSpec, base: SampleFunction, n: int, nodes, weight: float):
    vals, rts = [], set()
    for x in nodes:
        gap, fs = _frame_gap(spec, x, n)
        vals.append(gap - (1 - weight) * float(base(float(x))))
        rts.add((fs.r_plus, fs.r_minus))
    return np.array(vals), rts


def _step_blocks(spec: CocycleSpec, x: Fraction, start: int, count: int):
    t = orbit_phases(x, spec.alpha, start, count)
    m = spec.generator.matrices(t)
    return [LogScaledMat2.from_matrix(v) for v in m]


def _hyperbolicity(spec, n, xs, mu_log, eps):
    """Forward and arriving return blocks at each sample, as step sequences."""
    lam_log = spec.generator.log_lambda
    worst, witness, ok = math.inf, None, True
    if mu_log <= 0:
        return False, math.nan, "mu <= 1"
    mu = math.exp(mu_log)
    for x in xs:
        fs = frame_at(spec, x, n)
        for name, blocks in (("forward", _step_blocks(spec, x, 0, fs.r_plus)),
                             ("arriving", _step_blocks(spec, x, -fs.r_minus, fs.r_minus))):
            rep = check_mu_hyperbolic(blocks, mu, math.exp(lam_log), eps)
            if rep.worst_ratio < worst:
                worst = rep.worst_ratio
            if not rep.passes and ok:
                ok, witness = False, f"x={x} {name} block, index {rep.fail_index}"
    return ok, worst, witness


def _support_points(b: Fraction, k: int) -> np.ndarray:
    w = float(b) / 5
    inner = np.array([w, np.nextafter(w, 1), -w, float(b), -float(b), 0.5, -0.5])
    grid = np.arange(4 * k) / (4 * k)
    grid = grid[np.abs(signed(grid)) >= w]
    return np.concatenate([inner, grid])


def _verify_points(b: Fraction, k: int):
    """Exact samples: ``I_n/10`` and the rest of ``I_n`` on both sides."""
    inner = [-b / 10 + (b / 5) * Fraction(2 * i + 1, 2 * k) for i in range(k)]
    half = max(2, k // 2)
    outer = []
    for i in range(half):
        r = b / 10 + (b - b / 10) * Fraction(2 * i + 1, 2 * half)
        outer += [r, -r]
    return inner, outer


# -- steps --------------------------------------------------------------------

def _level_setup(ledger: CorrectionLedger, n: int):
    sch = ledger.schedule
    if n not in sch.log_values:
        raise ValueError(f"level {n} not in the schedule")
    ledger.table.check_level(n, 3)
    return sch.log_values[n], ledger.table.b(n)


def _refinement(spec, base, n, b, k, weight, spline_vals, nodes_f):
    """Compare the spline against fresh samples at the midpoints."""
    nodes = _nodes(b, k)
    mids = [(u + v) / 2 for u, v in zip(nodes, nodes[1:])][::max(1, k // 20)]
    fresh, _ = _mismatch(spec, base, n, mids, weight)
    s = CubicSpline(nodes_f, spline_vals)
    return float(np.max(np.abs(s(np.array([float(m) for m in mids])) - fresh)))


def build_phi_n(ledger: CorrectionLedger, n: int, opts: StepOptions | None = None,
                strict: bool = True) -> StepReport:
    """Add ``e_hat_n`` and verify the level-``n`` conditions.

    With ``strict`` a failed verification raises ``StepRejected``; either way
    the rejected correction is removed from the ledger.
    """
    opts = opts or StepOptions()
    mu_log, b = _level_setup(ledger, n)
    if any(k >= n for k in ledger.hats):
        raise ValueError(f"level {n} already built or out of order")
    earlier = [r for r in ledger.reports if r.kind == "hat" and not r.accepted]
    if earlier:
        raise ValueError("an earlier step was rejected")
    rep = StepReport(n, "hat", mu_log=mu_log)
    prev = ledger.spec(n - 1)
    base = ledger.base
    nodes = _nodes(b, opts.nodes)
    d, rts = _mismatch(prev, base, n, nodes, 0.0)
    if len(rts) != 1:
        rep.reasons.append(f"return times vary on I_n/5: {sorted(rts)}")
        ledger.reports.append(rep)
        if strict:
            raise StepRejected(rep.reasons[-1], rep)
        return rep
    rep.return_times = next(iter(rts))
    nodes_f = np.array([float(x) for x in nodes])
    if opts.refine:
        rep.refinement_error = _refinement(prev, base, n, b, opts.nodes, 0.0, d, nodes_f)
    corr = Correction(n, "hat", b, nodes_f, d, 0.0, opts.nu)
    ledger.hats[n] = corr
    new = ledger.spec(n)

    inner, outer = _verify_points(b, opts.verify_samples)
    # angle identity on I_n/10, and the frame shift against the previous cocycle
    res, ident = 0.0, 0.0
    for x in inner:
        gap, fs = _frame_gap(new, x, n)
        res = max(res, abs(gap - float(base(float(x)))))
        e = float(corr(float(x), base))
        old = iterate(prev, x, fs.r_plus)
        pred = compose(old, LogScaledMat2.from_matrix(rotation(-e)))
        now = iterate(new, x, fs.r_plus)
        scale = 2.0 ** (now.exponent - pred.exponent)
        ident = max(ident, float(np.max(np.abs(now.unit * scale - pred.unit))
                                 / np.max(np.abs(pred.unit))))
    rep.angle_residual, rep.identity_residual = res, ident
    # lower bound on the rest of I_n
    worst = math.inf
    for x in outer:
        gap, _ = _frame_gap(new, x, n)
        worst = min(worst, abs(gap) / (float(base(float(x))) / 2))
    rep.lower_bound_worst = worst
    rep.lower_bound_ok = worst >= 1
    step = max(1, len(inner) // 10)
    rep.hyperbolic, rep.hyper_worst_ratio, rep.hyper_witness = _hyperbolicity(
        new, n, inner[::step] + outer[::step], mu_log, opts.eps_hyp)
    pts = _support_points(b, opts.verify_samples)
    rep.support_ok = bool(np.array_equal(ledger.phi(n)(pts), ledger.phi(n - 1)(pts)))
    grid = np.linspace(-float(b) / 5, float(b) / 5, 2001)
    rep.correction_sup = float(np.max(np.abs(corr(grid, base))))
    q_prev = ledger.table.q[n - 1]
    if mu_log > 0:
        rep.smallness_constant = rep.correction_sup * math.exp(mu_log * q_prev / 3)
    _finish(ledger, rep, opts.tol_angle, strict, ledger.hats, n)
    return rep


def build_phi_tilde_n(ledger: CorrectionLedger, n: int, opts: StepOptions | None = None,
                      strict: bool = True) -> StepReport:
    """Add the resonant correction ``e~_n = -f_n (s_n - u_n)`` on top of ``phi_n``."""
    opts = opts or StepOptions()
    mu_log, b = _level_setup(ledger, n)
    if n not in ledger.hats:
        raise ValueError(f"level {n} has not been built")
    if not any(r.level == n and r.kind == "hat" and r.accepted for r in ledger.reports):
        raise ValueError(f"level {n} was not accepted")
    rep = StepReport(n, "tilde", mu_log=mu_log)
    cur = ledger.spec(n)
    base = ledger.base
    nodes = _nodes(b, opts.nodes)
    # rho = (s_n - u_n) - phi_0; e~ = -f (phi_0 + rho)
    rho, rts = _mismatch(cur, base, n, nodes, 0.0)
    rep.return_times = next(iter(rts)) if len(rts) == 1 else (0, 0)
    nodes_f = np.array([float(x) for x in nodes])
    if opts.refine:
        rep.refinement_error = _refinement(cur, base, n, b, opts.nodes, 0.0, rho, nodes_f)
    corr = Correction(n, "tilde", b, nodes_f, rho, 1.0, opts.nu)
    ledger.tildes[n] = corr
    new = ledger.spec(n, tilde=True)
    inner, outer = _verify_points(b, opts.verify_samples)
    res = 0.0
    for x in inner:
        gap, _ = _frame_gap(new, x, n)
        res = max(res, abs(gap))
    rep.angle_residual = res
    rep.lower_bound_ok = True
    step = max(1, len(inner) // 10)
    rep.hyperbolic, rep.hyper_worst_ratio, rep.hyper_witness = _hyperbolicity(
        new, n, inner[::step] + outer[::step], mu_log, opts.eps_hyp)
    pts = _support_points(b, opts.verify_samples)
    rep.support_ok = bool(np.array_equal(ledger.phi(n, tilde=True)(pts), ledger.phi(n)(pts)))
    grid = np.linspace(-float(b) / 5, float(b) / 5, 2001)
    rep.correction_sup = float(np.max(np.abs(corr(grid, base))))
    rep.smallness_constant = rep.correction_sup * ledger.table.q[n + 1] ** 2
    rep.identity_residual = 0.0
    _finish(ledger, rep, opts.tol_resonance, strict, ledger.tildes, n)
    return rep


def _finish(ledger, rep: StepReport, tol: float, strict: bool, store: dict, n: int):
    if not rep.angle_residual <= tol:
        rep.reasons.append(f"angle identity residual {rep.angle_residual:.3g} > {tol:g}")
    if not rep.lower_bound_ok:
        rep.reasons.append(f"|s-u| >= phi_0/2 fails (worst ratio {rep.lower_bound_worst:.3g})")
    if not rep.hyperbolic:
        rep.reasons.append(f"hyperbolicity fails: {rep.hyper_witness}")
    if not rep.support_ok:
        rep.reasons.append("correction leaks outside I_n/5")
    if rep.identity_residual > 1e-9:
        rep.reasons.append(f"frame shift identity residual {rep.identity_residual:.3g}")
    rep.accepted = not rep.reasons
    ledger.reports.append(rep)
    if not rep.accepted:
        del store[n]
        if strict:
            raise StepRejected("; ".join(rep.reasons), rep)
