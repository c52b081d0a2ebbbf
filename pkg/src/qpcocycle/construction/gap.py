"""Finite-horizon Lyapunov exponents of ``A_n`` against its resonant twin."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

from ..cocycle import MAX_STEPS, FiniteLEEstimate, finite_le, finite_le_excluding, frame_at, iterate
from ..sl2 import LogScaledMat2, compose
from .builder import CorrectionLedger
from .exceptional import exceptional_set

SPIKE_RATIO = 200


class PreconditionError(ValueError):
    """The frequency lacks the spike ``q_{n+2} >= 200 q_{n+1}``."""


@dataclass
class LEGapResult:
    n: int
    log_lambda: float
    horizon: int
    capped: bool
    grids: list[int]
    le_A: list[FiniteLEEstimate]
    le_Atilde: list[FiniteLEEstimate]
    threshold_fraction: float
    runtime: float = 0.0
    control: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def gaps(self) -> list[float]:
        return [a.value - b.value for a, b in zip(self.le_A, self.le_Atilde)]

    @property
    def gap_fractions(self) -> list[float]:
        return [g / self.log_lambda for g in self.gaps]

    @property
    def passes(self) -> bool:
        return all(f >= self.threshold_fraction for f in self.gap_fractions)

    def to_dict(self) -> dict:
        return {"n": self.n, "log_lambda": self.log_lambda, "horizon": self.horizon,
                "capped": self.capped, "grids": list(self.grids),
                "le_A": [e.to_dict() for e in self.le_A],
                "le_Atilde": [e.to_dict() for e in self.le_Atilde],
                "gaps": self.gaps, "gap_fractions": self.gap_fractions,
                "threshold_fraction": self.threshold_fraction, "passes": self.passes,
                "control": self.control, "notes": list(self.notes)}

    def csv_rows(self) -> list[dict]:
        return [{"grid": g, "horizon": self.horizon, "log_lambda": self.log_lambda,
                 "le_A": a.value, "le_A_stderr": a.stderr,
                 "excluded_fraction": a.excluded_fraction,
                 "le_Atilde": b.value, "le_Atilde_stderr": b.stderr,
                 "gap": a.value - b.value, "gap_fraction": (a.value - b.value) / self.log_lambda}
                for g, a, b in zip(self.grids, self.le_A, self.le_Atilde)]


def le_gap_experiment(ledger: CorrectionLedger, n: int, grids, horizon: int | None = None,
                      threshold_fraction: float = 0.1, workers: int | None = None,
                      control: bool = False, min_spike: int = SPIKE_RATIO) -> LEGapResult:
    """``L(A_n)`` off the exceptional set against ``L(A~_n)`` on the same grids.

    ``control`` swaps ``A~_n`` for ``A_n`` (all points kept), so the gap measures
    only the exclusion effect and grid dispersion.
    """
    t = ledger.table
    t.check_level(n, 3)
    if t.q[n + 2] < min_spike * t.q[n + 1]:
        raise PreconditionError(f"q_{n+2} = {t.q[n+2]} < {min_spike} q_{n+1} = {min_spike * t.q[n+1]}")
    H = max(t.q[n + 2], horizon or 0)
    capped = H > MAX_STEPS
    notes = []
    if capped:
        H = MAX_STEPS
        notes.append(f"horizon capped at {MAX_STEPS} below q_(n+2)")
    t0 = time.perf_counter()
    spec_a = ledger.spec(n)
    spec_t = spec_a if control else ledger.spec(n, tilde=True)
    excl = exceptional_set(t, n)
    le_a, le_t = [], []
    for G in grids:
        if control:
            le_a.append(finite_le(spec_a, H, G, workers))
        else:
            le_a.append(finite_le_excluding(spec_a, H, G, excl, workers))
        le_t.append(finite_le(spec_t, H, G, workers))
    return LEGapResult(n, ledger.log_lambda, H, capped, list(grids), le_a, le_t,
                       threshold_fraction, time.perf_counter() - t0, control, notes)


@dataclass(frozen=True)
class CancellationProfile:
    start: Fraction
    returns: int
    steps: int
    rate_A: float
    rate_Atilde: float

    def to_dict(self):
        return {"start": str(self.start), "returns": self.returns, "steps": self.steps,
                "rate_A": self.rate_A, "rate_Atilde": self.rate_Atilde}


def cancellation_profile(ledger: CorrectionLedger, n: int, x, max_returns: int = 10**4
                         ) -> CancellationProfile:
    """Compose consecutive return blocks while the orbit stays in ``I_n/10``.

    Rates are log-norm per step of the composed products of ``A_n`` and ``A~_n``.
    """
    b = ledger.table.b(n)
    spec_a, spec_t = ledger.spec(n), ledger.spec(n, tilde=True)
    y = Fraction(x)
    acc_a = acc_t = LogScaledMat2.identity()
    steps = k = 0

    def inside(v):
        v = v % 1
        v = v - 1 if v >= Fraction(1, 2) else v
        return -b / 10 < v < b / 10

    if not inside(y):
        raise ValueError("start point must lie in I_n/10")
    while inside(y) and k < max_returns:
        r = frame_at(spec_a, y, n).r_plus
        acc_a = compose(iterate(spec_a, y, r), acc_a)
        acc_t = compose(iterate(spec_t, y, r), acc_t)
        steps += r
        k += 1
        y = (y + r * ledger.table.alpha) % 1
    return CancellationProfile(Fraction(x), k, steps, acc_a.log_norm() / steps,
                               acc_t.log_norm() / steps)

