"""Command line: ``qpcocycle <verb> ...``."""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .. import sl2
from ..cocycle import CocycleSpec, Constant, RotHyp, Schrodinger, finite_le, frame_fields
from ..construction import make_sample
from ..frequency import classify, convergents, parse_frequency, synthesize
from ..orbit import (arc_samples, brute_return_times, critical_interval, return_time_closed,
                     subintervals, three_distance)
from .config import ConfigError, ExperimentConfig
from .export import ExportError, csv_columns, csv_text, dumps, export
from .runs import construct_run
from .suites import SUITES, run_suite


def _rows(table):
    return [{**r, "z": f"{r['z_num']}/{r['z_den']}"} for r in table.rows()]


def _table(text: str, depth: int | None):
    return convergents(parse_frequency(text, depth))


def _print(text: str):
    sys.stdout.write(text)


# -- freq -------------------------------------------------------------------------

def cmd_freq(a) -> int:
    if a.action == "expand":
        pq = parse_frequency(a.rational, a.depth)
        _print(dumps(_rows(convergents(pq))))
    elif a.action == "synth":
        rule = {"golden": {"kind": "constant", "a": 1},
                "silver": {"kind": "constant", "a": 2}}.get(a.rule) or json.loads(a.rule)
        _print(dumps(_rows(convergents(synthesize(rule, a.depth, a.seed)))))
    else:
        t = _table(a.freq, a.depth)
        _print(dumps(classify(t, a.gamma, a.tau, a.delta).to_dict()))
    return 0


# -- orbit ------------------------------------------------------------------------

def cmd_orbit(a) -> int:
    t = _table(a.freq, a.depth)
    if a.action == "gaps":
        r = three_distance(t, a.n)
        _print(dumps({"n": r.n, "small": str(r.small), "large": str(r.large),
                      "count_small": r.count_small, "count_large": r.count_large,
                      "successor_ok": r.successor_ok, "order_ok": r.order_ok, "ok": r.ok,
                      "points": [str(p) for p in r.points], "indices": list(r.indices)}))
        return 0 if r.ok else 1
    rows, bad = [], 0
    arc = critical_interval(t, a.n)
    for tag, piece in subintervals(t, a.n).items():
        xs = arc_samples(piece, a.samples)
        brute = (brute_return_times(xs, t.alpha, arc, a.direction, t.q[a.n + 2] + t.q[a.n + 1])
                 if a.brute else [None] * len(xs))
        for x, tb in zip(xs, brute):
            tc, _ = return_time_closed(x, t, a.n, a.direction)
            match = "" if tb is None else int(tc == tb)
            bad += match == 0
            rows.append({"x_num": x.numerator, "x_den": x.denominator, "subinterval": tag,
                         "t_closed": tc, "t_brute": "" if tb is None else tb, "match": match})
    _print(csv_text(rows, csv_columns("orbit_return.csv")))
    return 1 if bad else 0


# -- sl2 --------------------------------------------------------------------------

def cmd_sl2(a) -> int:
    rep = sl2.run_lemma_trials(a.lemma, a.trials, a.seed)
    _print(dumps(rep))
    return 0 if rep["violations"] == 0 else 1


# -- cocycle ----------------------------------------------------------------------

def cocycle_from_json(doc: dict) -> CocycleSpec:
    """``{"freq": ..., "depth": ..., "generator": {"kind": ...}}``."""
    t = _table(str(doc.get("freq", "golden")), doc.get("depth", 20))
    g = doc["generator"]
    kind = g["kind"]
    if kind == "rothyp":
        s = g.get("sample", {"class": "Cl"})
        gen = RotHyp(math.log(float(g["lambda"])), make_sample(s["class"], s.get("params")))
    elif kind == "schrodinger":
        pot = g.get("potential", {"kind": "zero"})
        if pot["kind"] == "zero":
            def v(x):
                return np.zeros_like(x)
        elif pot["kind"] == "cos":
            k = float(pot.get("coupling", 1.0))

            def v(x):
                return 2 * k * np.cos(2 * math.pi * x)
        else:
            raise ValueError(f"unknown potential {pot['kind']!r}")
        gen = Schrodinger(float(g["energy"]), v)
    elif kind == "constant":
        gen = Constant(tuple(float(v) for v in g["matrix"]))
    else:
        raise ValueError(f"unknown generator {kind!r}")
    return CocycleSpec(t, gen)


def cmd_cocycle(a) -> int:
    spec = cocycle_from_json(json.loads(Path(a.spec).read_text()))
    if a.action == "le":
        _print(dumps(finite_le(spec, a.N, a.grid, a.workers).to_dict()))
        return 0
    rows = []
    for fs in frame_fields(spec, a.level, a.samples):
        rows.append({"x": float(fs.x), "logscale": fs.log_plus, "s_angle": fs.s_angle,
                     "u_angle": fs.u_angle, "flags": "ok" if fs.well_defined else "ill-defined"})
    _print(csv_text(rows, csv_columns("frames.csv")))
    return 0


# -- construct / verify / export ----------------------------------------------------

def cmd_construct(a) -> int:
    cfg = ExperimentConfig.load(a.config)
    code, man = construct_run(cfg, a.out, a.workers)
    _print(json.dumps({"out": str(a.out), "passed": code == 0,
                       "steps": man.steps, "digests": man.digests}, indent=2) + "\n")
    return code


def cmd_verify(a) -> int:
    cfg = ExperimentConfig.load(a.config) if a.config else ExperimentConfig()
    code, rep = run_suite(a.suite, cfg, a.workers)
    text = dumps(rep)
    if a.out:
        Path(a.out).write_text(text)
    else:
        _print(text)
    for c in rep["checks"]:
        sys.stderr.write(f"{'PASS' if c['passed'] else 'FAIL'} [{c['criterion']}] {c['name']}\n")
    return code


def cmd_export(a) -> int:
    for p in export(a.run, a.format):
        _print(f"{p}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qpcocycle", description=__doc__)
    p.add_argument("--workers", type=int, default=None,
                   help="worker threads (default: $QPCOCYCLE_WORKERS or 1)")
    sub = p.add_subparsers(dest="verb", required=True)

    f = sub.add_parser("freq", help="continued fractions and convergents")
    fs = f.add_subparsers(dest="action", required=True)
    e = fs.add_parser("expand")
    e.add_argument("--rational", required=True, help="P/Q")
    e.add_argument("--depth", type=int, required=True)
    s = fs.add_parser("synth")
    s.add_argument("--rule", required=True, help="golden, silver or a JSON rule")
    s.add_argument("--depth", type=int, required=True)
    s.add_argument("--seed", type=int, default=None)
    c = fs.add_parser("classify")
    c.add_argument("--freq", default="golden")
    c.add_argument("--depth", type=int, default=None)
    c.add_argument("--gamma", type=float, required=True)
    c.add_argument("--tau", type=float, required=True)
    c.add_argument("--delta", type=float, default=0.5)

    o = sub.add_parser("orbit", help="return times and gap structure")
    os_ = o.add_subparsers(dest="action", required=True)
    g = os_.add_parser("gaps")
    r = os_.add_parser("return")
    for q in (g, r):
        q.add_argument("--freq", required=True)
        q.add_argument("--n", type=int, required=True)
        q.add_argument("--depth", type=int, default=None)
    r.add_argument("--samples", type=int, default=20)
    r.add_argument("--brute", action="store_true")
    r.add_argument("--direction", choices=("forward", "backward"), default="forward")

    m = sub.add_parser("sl2", help="randomized checks of the 2x2 product lemmas")
    ms = m.add_subparsers(dest="action", required=True)
    v = ms.add_parser("verify")
    v.add_argument("--lemma", choices=("basic", "resonant", "hyperbolic", "faa"), required=True)
    v.add_argument("--trials", type=int, default=1000)
    v.add_argument("--seed", type=int, default=1)

    k = sub.add_parser("cocycle", help="finite Lyapunov exponents and frame fields")
    ks = k.add_subparsers(dest="action", required=True)
    le = ks.add_parser("le")
    le.add_argument("--spec", required=True)
    le.add_argument("--N", type=int, required=True)
    le.add_argument("--grid", type=int, required=True)
    fr = ks.add_parser("frames")
    fr.add_argument("--spec", required=True)
    fr.add_argument("--level", type=int, required=True)
    fr.add_argument("--samples", type=int, default=50)

    cn = sub.add_parser("construct", help="build, verify and measure a construction")
    cs = cn.add_subparsers(dest="action", required=True)
    run = cs.add_parser("run")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)

    vf = sub.add_parser("verify", help="run an acceptance suite")
    vf.add_argument("--suite", choices=(*SUITES, "all"), default="all")
    vf.add_argument("--config", default=None)
    vf.add_argument("--out", default=None)

    ex = sub.add_parser("export", help="re-export a completed run")
    ex.add_argument("--run", required=True)
    ex.add_argument("--format", choices=("csv", "json"), required=True)
    return p


HANDLERS = {"freq": cmd_freq, "orbit": cmd_orbit, "sl2": cmd_sl2, "cocycle": cmd_cocycle,
            "construct": cmd_construct, "verify": cmd_verify, "export": cmd_export}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return HANDLERS[args.verb](args)
    except (ConfigError, ExportError, ValueError, KeyError, FileNotFoundError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
