"""``construct run``: build ledgers, verify, measure the LE gap, persist."""
from __future__ import annotations

import time
from pathlib import Path

from .config import ExperimentConfig
from .export import csv_columns, csv_text, dumps, write_text
from .manifest import RunManifest
from .suites import build_ledger, suite_construction, suite_le_gap

OUTPUTS = ("config.json", "ledger.json", "verification.json", "le_gap.csv")


def construct_run(cfg: ExperimentConfig, out_dir, workers=None) -> tuple[int, RunManifest]:
    t0 = time.perf_counter()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ledgers = {lam: build_ledger(cfg, lam) for lam in cfg.lambda_sweep}
    checks = suite_construction(cfg, ledgers)
    gap_checks, results = suite_le_gap(cfg, workers, ledgers)
    checks += gap_checks
    passed = all(c["passed"] for c in checks)
    rows = []
    for lam, res in zip([lam for lam in cfg.lambda_sweep if ledgers[lam][1]], results):
        for r in res.csv_rows():
            rows.append({"lambda": float(lam), **r})
    write_text(out / "config.json", cfg.to_json())
    write_text(out / "ledger.json", dumps({
        "config_digest": cfg.digest(),
        "ledgers": {repr(float(lam)): led.to_dict() for lam, (led, _) in ledgers.items()}}))
    write_text(out / "verification.json", dumps({
        "config_digest": cfg.digest(), "passed": passed, "checks": checks}))
    write_text(out / "le_gap.csv", csv_text(rows, csv_columns("le_gap.csv")))
    man = RunManifest(cfg.digest())
    for lam, (led, _) in ledgers.items():
        for r in led.reports:
            man.steps.append({"lambda": float(lam), "level": r.level, "kind": r.kind,
                              "accepted": r.accepted})
    man.add_outputs(out, OUTPUTS)
    man.runtime_seconds = round(time.perf_counter() - t0, 3)
    man.write(out)
    return (0 if passed else 1), man
