"""Verification suites. Each returns a JSON-ready report with one entry per check.

Reports contain no timings or host details, so identical configs give
byte-identical reports whatever the worker count.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .. import sl2
from ..cocycle import CocycleSpec, Constant, Schrodinger, finite_le
from ..construction import (CorrectionLedger, StepOptions, StepRejected,
                            build_phi_n, build_phi_tilde_n, cancellation_profile,
                            lambda_schedule, le_gap_experiment, make_sample)
from ..frequency import GOLDEN, SILVER, convergents, synthesize
from ..orbit import (arc_samples, brute_return_times, critical_interval, first_entry_times,
                     return_map_image, return_time_closed, self_return_times, subintervals,
                     three_distance)
from .config import ExperimentConfig

SUITES = ("orbit-oracle", "sl2-lemmas", "construction-step", "le-gap", "cocycle-sanity")

ORBIT_FAMILIES = (
    ("golden", GOLDEN, 15),
    ("silver", SILVER, 15),
    ("spike", {"kind": "spike", "base": 1, "positions": [5], "factor": 200}, 15),
    ("random", {"kind": "random", "low": 1, "high": 9, "seed": 7}, 9),
    ("identity", {"kind": "explicit", "quotients": [1, 2, 3, 4, 5, 6, 7, 8]}, 8),
)


def _check(criterion: int, name: str, invariant: str, passed: bool, witness=None, **metrics):
    out = {"criterion": criterion, "name": name, "invariant": invariant,
           "passed": bool(passed), "witness": witness}
    out.update(metrics)
    return out


def _levels(table, lo: int, hi: int, reach: int = 3):
    return [n for n in range(lo, hi + 1) if n + reach <= table.M]


# -- orbit ----------------------------------------------------------------------

def orbit_return_rows(table, n: int, samples: int):
    """Closed form against brute force on every tagged piece, both directions."""
    rows = []
    arc = critical_interval(table, n)
    cap = table.q[n + 2] + table.q[n + 1]
    pts = [(x, tag) for tag, piece in subintervals(table, n).items()
           for x in arc_samples(piece, samples)]
    xs = [x for x, _ in pts]
    for direction in ("forward", "backward"):
        brute = brute_return_times(xs, table.alpha, arc, direction, cap)
        for (x, tag), tb in zip(pts, brute):
            tc, _ = return_time_closed(x, table, n, direction)
            rows.append((x, tag, direction, tc, tb))
    return rows


def suite_orbit_oracle(cfg: ExperimentConfig) -> list[dict]:
    checks = []
    rng = np.random.default_rng(cfg.seed)
    for fam, rule, depth in ORBIT_FAMILIES:
        table = convergents(synthesize(rule, depth))
        mism, total, witness = 0, 0, None
        images_ok, img_witness = True, None
        for n in _levels(table, 2, cfg.orbit_max_level):
            for x, tag, d, tc, tb in orbit_return_rows(table, n, cfg.orbit_samples):
                total += 1
                if tc != tb:
                    mism += 1
                    witness = witness or {"n": n, "x": str(x), "piece": tag, "direction": d,
                                          "closed": tc, "brute": tb}
            for tag in subintervals(table, n):
                im = return_map_image(table, n, tag)
                if not im.holds and images_ok:
                    images_ok, img_witness = False, {"n": n, "piece": tag}
        checks.append(_check(1, f"return-time oracle [{fam}]",
                             "closed-form first return to I_n equals brute force",
                             mism == 0 and total > 0, witness, samples=total, mismatches=mism))
        checks.append(_check(1, f"return-map images [{fam}]",
                             "each tagged piece maps onto its successor", images_ok, img_witness))
        # three distance
        td_ok, td_w, td_levels = True, None, 0
        for n in _levels(table, 0, cfg.orbit_max_level, 2):
            rep = three_distance(table, n)
            td_levels += 1
            if not rep.ok and td_ok:
                td_ok, td_w = False, {"n": n, "successor_ok": rep.successor_ok,
                                      "order_ok": rep.order_ok}
        checks.append(_check(2, f"three-distance [{fam}]",
                             "gaps take exactly |z_n| and |z_n|+|z_{n+1}|, successor rule holds",
                             td_ok, td_w, levels=td_levels))
        # self returns to I0
        sr_ok, sr_w, sr_n = True, None, 0
        for n in _levels(table, 2, cfg.orbit_max_level):
            i0 = subintervals(table, n)["I0"]
            xs = arc_samples(i0, 100, include_endpoints=False)
            allowed = {table.q[n + 2], table.q[n + 2] + table.q[n + 1]}
            for x, t in zip(xs, self_return_times(xs, table, n)):
                sr_n += 1
                if t not in allowed and sr_ok:
                    sr_ok, sr_w = False, {"n": n, "x": str(x), "time": t}
        checks.append(_check(3, f"I0 self-returns [{fam}]",
                             "return of I0 to itself is q_{n+2} or q_{n+2}+q_{n+1}",
                             sr_ok, sr_w, samples=sr_n))
        # first entry
        fe_ok, fe_w, fe_n = True, None, 0
        den = 2 ** 40
        for n in _levels(table, 2, cfg.orbit_max_level, 1):
            xs = [Fraction(int(v), den) for v in rng.integers(0, den, 1000)]
            for x, t in zip(xs, first_entry_times(xs, table, n)):
                fe_n += 1
                if not t < table.q[n + 1] and fe_ok:
                    fe_ok, fe_w = False, {"n": n, "x": str(x), "time": t}
        checks.append(_check(4, f"first entry [{fam}]", "first entry time < q_{n+1}",
                             fe_ok, fe_w, samples=fe_n))
    return checks


# -- sl2 ------------------------------------------------------------------------

def random_sl2(rng: np.random.Generator, max_cond: float = 1e8) -> np.ndarray:
    """Gaussian matrix normalised to determinant 1, redrawn until ``cond <= max_cond``."""
    while True:
        m = rng.normal(size=(2, 2))
        d = np.linalg.det(m)
        if d < 0:
            m[0] = -m[0]
            d = -d
        if d == 0:
            continue
        m = m / math.sqrt(d)
        if np.linalg.cond(m) <= max_cond:
            return m


def suite_sl2(cfg: ExperimentConfig) -> list[dict]:
    checks = []
    rng = np.random.default_rng(cfg.seed)
    worst, w = 0.0, None
    for i in range(cfg.trials):
        # log-uniform conditioning up to 1e8 on top of a Gaussian draw
        m = random_sl2(rng) if i % 2 else sl2.from_frame(
            rng.uniform(0, math.pi), rng.uniform(0, 0.5 * math.log(1e8)),
            rng.uniform(0, math.pi)).matrix()
        fr = sl2.svd_frame(m)
        err = float(np.linalg.norm(sl2.reconstruct(fr) - m) / np.linalg.norm(m))
        if err > worst:
            worst, w = err, {"trial": i, "matrix": m.ravel().tolist()}
    checks.append(_check(5, "svd frame reconstruction",
                         "R_u diag(e^l, e^-l) R_{pi/2-s} reproduces A to 1e-12 relative",
                         worst <= 1e-12, w if worst > 1e-12 else None, worst_case=worst,
                         trials=cfg.trials))
    for lemma, crit, inv in (("basic", 6, "non-resonant norm and frame-drift bounds"),
                             ("resonant", 7, "||BA|| <= 2 max(||A||/||B||, ||B||/||A||) when u(A)=s(B)")):
        rep = sl2.run_lemma_trials(lemma, cfg.trials if lemma == "basic" else 1000, cfg.seed)
        checks.append(_check(crit, f"{lemma} product lemma", inv, rep["violations"] == 0,
                             None, trials=rep["trials"], violations=rep["violations"],
                             worst_case=rep["worst_case"]))
    # misaligned control: the bound must fail somewhere
    rng2 = np.random.default_rng(cfg.seed + 1)
    viol = 0
    for _ in range(1000):
        a = sl2.random_frame_matrix(rng2, math.log(1e2), math.log(1e8))
        fa = sl2.svd_frame(a)
        b = sl2.from_frame(rng2.uniform(0, math.pi), rng2.uniform(math.log(1e2), math.log(1e8)),
                           fa.u_angle + 1e-3)
        viol += not sl2.resonant_cancellation_check(a, b).holds
    checks.append(_check(7, "resonant control (1e-3 misaligned)",
                         "the cancellation bound needs exact alignment", viol >= 1, None,
                         trials=1000, violations=viol))
    bad = []
    for n in range(1, cfg.max_partition + 1):
        for r in (Fraction(1), Fraction(2), Fraction(1, 2), Fraction(5)):
            if sl2.faa_di_bruno_partition_sum(n, r) != sl2.faa_di_bruno_closed(n, r):
                bad.append({"n": n, "R": str(r)})
    checks.append(_check(8, "partition identity", "sum over partitions equals R(1+R)^{n-1}",
                         not bad, bad[0] if bad else None, cases=4 * cfg.max_partition))
    return checks


# -- construction -----------------------------------------------------------------

def build_ledger(cfg: ExperimentConfig, lam: float, strict: bool = False):
    table = convergents(synthesize(cfg.freq_rule, cfg.depth))
    log_lam = math.log(lam)
    sch = lambda_schedule(cfg.cls, log_lam, cfg.N, cfg.n_max, table, cfg.class_params,
                          epsilon=cfg.tolerances["eps_hyp"])
    base = make_sample(cfg.cls, {k: v for k, v in cfg.class_params.items()
                                 if k not in ("delta", "tau", "frequency_class")})
    ledger = CorrectionLedger(table, base, log_lam, sch)
    opts = StepOptions(nodes=cfg.nodes, verify_samples=cfg.verify_samples,
                       tol_angle=cfg.tolerances["angle"],
                       tol_resonance=cfg.tolerances["resonance"],
                       eps_hyp=cfg.tolerances["eps_hyp"])
    ok = True
    for n in range(cfg.N, cfg.n_max + 1):
        try:
            rep = build_phi_n(ledger, n, opts, strict=True)
        except StepRejected:
            ok = False
            break
        ok &= rep.accepted
    if ok:
        try:
            build_phi_tilde_n(ledger, cfg.n_max, opts, strict=True)
        except StepRejected:
            ok = False
    if strict and not ok:
        raise StepRejected("construction did not complete", ledger.reports[-1])
    return ledger, ok


def suite_construction(cfg: ExperimentConfig, ledgers=None) -> list[dict]:
    checks = []
    for lam in cfg.lambda_sweep:
        ledger, ok = (ledgers or {}).get(lam) or build_ledger(cfg, lam)
        for rep in ledger.reports:
            tag = f"{rep.kind} step n={rep.level} lambda={lam:g}"
            checks.append(_check(9, tag,
                                 "hyperbolicity with mu=lambda_n, angle identity on I_n/10, "
                                 "exact support", rep.accepted,
                                 None if rep.accepted else rep.reasons,
                                 angle_residual=rep.angle_residual,
                                 hyper_worst_ratio=rep.hyper_worst_ratio,
                                 support_ok=rep.support_ok, mu_log=rep.mu_log,
                                 correction_sup=rep.correction_sup))
        if not ok:
            checks.append(_check(9, f"construction lambda={lam:g}", "all steps accepted",
                                 False, "construction stopped early"))
            continue
        prof = cancellation_profile(ledger, cfg.n_max, Fraction(0))
        checks.append(_check(9, f"cancellation along returns lambda={lam:g}",
                             "resonant product grows at most (1/2) log lambda per step",
                             prof.rate_Atilde <= 0.5 * ledger.log_lambda and prof.returns >= 10,
                             None, **prof.to_dict()))
    return checks


def suite_le_gap(cfg: ExperimentConfig, workers=None, ledgers=None) -> tuple[list[dict], list]:
    checks, results = [], []
    for lam in cfg.lambda_sweep:
        ledger, ok = (ledgers or {}).get(lam) or build_ledger(cfg, lam)
        if not ok:
            checks.append(_check(10, f"LE gap lambda={lam:g}", "construction completed",
                                 False, "construction stopped early"))
            continue
        res = le_gap_experiment(ledger, cfg.n_max, cfg.grid, cfg.horizon, cfg.gap_threshold,
                                workers)
        results.append(res)
        fr = res.gap_fractions
        checks.append(_check(10, f"LE gap lambda={lam:g}",
                             f"L(A_n) - L(A~_n) >= {cfg.gap_threshold:g} log lambda on every grid",
                             res.passes, None if res.passes else {"gap_fractions": fr},
                             **res.to_dict()))
        ctrl = le_gap_experiment(ledger, cfg.n_max, cfg.grid[:1], cfg.horizon, 0.0, workers,
                                 control=True)
        checks.append(_check(10, f"LE gap control lambda={lam:g}",
                             "A~ replaced by A gives zero gap", ctrl.gaps[0] == 0.0, None,
                             gap=ctrl.gaps[0]))
    return checks, results


# -- cocycle sanity ---------------------------------------------------------------

def suite_cocycle(cfg: ExperimentConfig, workers=None) -> list[dict]:
    table = convergents(synthesize(GOLDEN, 20))
    checks = []
    rot = finite_le(CocycleSpec(table, Constant(tuple(sl2.rotation(1.0).ravel()))),
                    10_000, 64, workers)
    checks.append(_check(11, "rotation cocycle", "LE = 0 within 1e-12",
                         abs(rot.value) <= 1e-12, None, value=rot.value))
    lam = 30.0
    const = finite_le(CocycleSpec(table, Constant(tuple(sl2.diag(lam).ravel()))),
                      10_000, 64, workers)
    err = const.value - math.log(lam)
    checks.append(_check(11, "constant diagonal cocycle", "LE = log lambda (rounding only, 1e-12)",
                         abs(err) <= 1e-12, None, value=const.value, error=err))
    schr = finite_le(CocycleSpec(table, Schrodinger(3.0, lambda t: np.zeros_like(t))),
                     10_000, 64, workers)
    target = math.log((3 + math.sqrt(5)) / 2)
    err = schr.value - target
    checks.append(_check(11, "free Schrodinger E=3, N=1e4", "LE = log((3+sqrt5)/2) within 1e-9",
                         abs(err) <= 1e-9, None if abs(err) <= 1e-9 else {"N": 10_000, "E": 3.0},
                         value=schr.value, error=err,
                         finite_n_bias=math.log(3 / math.sqrt(5)) / 10_000))
    return checks


# -- driver -----------------------------------------------------------------------

def run_suite(name: str, cfg: ExperimentConfig, workers=None) -> tuple[int, dict]:
    """Run one suite (or ``all``); exit status 0 only if every check passes."""
    names = SUITES if name == "all" else (name,)
    for nm in names:
        if nm not in SUITES:
            raise ValueError(f"unknown suite {nm!r}")
    checks = []
    ledgers = {}
    if any(nm in ("construction-step", "le-gap") for nm in names):
        ledgers = {lam: build_ledger(cfg, lam) for lam in cfg.lambda_sweep}
    for nm in names:
        if nm == "orbit-oracle":
            part = suite_orbit_oracle(cfg)
        elif nm == "sl2-lemmas":
            part = suite_sl2(cfg)
        elif nm == "construction-step":
            part = suite_construction(cfg, ledgers)
        elif nm == "le-gap":
            part, _ = suite_le_gap(cfg, workers, ledgers)
        else:
            part = suite_cocycle(cfg, workers)
        for c in part:
            c["suite"] = nm
        checks += part
    passed = all(c["passed"] for c in checks)
    report = {"suite": name, "config_digest": cfg.digest(), "passed": passed,
              "failures": [{"suite": c["suite"], "name": c["name"], "invariant": c["invariant"],
                            "witness": c["witness"]} for c in checks if not c["passed"]],
              "checks": checks}
    return (0 if passed else 1), report

