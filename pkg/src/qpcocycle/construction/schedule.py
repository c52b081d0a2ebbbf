"""Decreasing hyperbolicity rates ``lambda_n`` for each smoothness class."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..frequency import ConvergentTable


@dataclass(frozen=True)
class LambdaSchedule:
    cls: str
    log_lambda: float
    N: int
    n_max: int
    log_values: dict[int, float]
    log_tilde: dict[int, float] | None
    epsilon: float
    sum_value: float
    sum_bound: float
    threshold_log: float | None
    threshold_ok: bool | None
    notes: list[str] = field(default_factory=list)

    def lam(self, n: int) -> float:
        return math.exp(self.log_values[n])

    @property
    def log_limit(self) -> float:
        return self.log_values[self.n_max]

    @property
    def sum_ok(self) -> bool:
        return self.sum_value <= self.sum_bound

    @property
    def band_ok(self) -> bool:
        """``lambda_inf > lambda^{1 - eps/4}``."""
        return self.log_limit > (1 - self.epsilon / 4) * self.log_lambda

    def monotone(self) -> bool:
        v = [self.log_values[n] for n in sorted(self.log_values)]
        return all(b < a for a, b in zip(v, v[1:]))

    def to_dict(self) -> dict:
        return {
            "class": self.cls, "log_lambda": self.log_lambda, "N": self.N,
            "n_max": self.n_max,
            "log_values": {str(k): v for k, v in sorted(self.log_values.items())},
            "log_tilde": None if self.log_tilde is None else
            {str(k): v for k, v in sorted(self.log_tilde.items())},
            "epsilon": self.epsilon, "sum_value": self.sum_value,
            "sum_bound": self.sum_bound, "sum_ok": self.sum_ok,
            "threshold_log": self.threshold_log, "threshold_ok": self.threshold_ok,
            "band_ok": self.band_ok, "notes": list(self.notes),
        }


def lambda_schedule(cls: str, log_lambda: float, N: int, n_max: int,
                    table: ConvergentTable, params: dict | None = None,
                    epsilon: float = 0.1, relaxation: float = 1.0) -> LambdaSchedule:
    """Schedule ``log lambda_n`` for ``N <= n <= n_max``.

    ``params`` carries the class parameters (``l``; ``delta``; ``s``, ``tau``
    and ``frequency_class``). The large-``lambda`` threshold is reported, with
    its exponent multiplied by ``relaxation``, and never enforced.
    """
    params = dict(params or {})
    if not log_lambda > 0:
        raise ValueError("lambda must exceed 1")
    if not 1 <= N <= n_max:
        raise ValueError("need 1 <= N <= n_max")
    table.check_level(n_max, 3)
    q = table.q
    vals: dict[int, float] = {}
    tilde = None
    notes: list[str] = []
    threshold_log = threshold_ok = None
    if cls == "Cl":
        l = int(params.get("l", 1))
        vals[N] = log_lambda + (l + 1) * math.log(table.b(N))
        for n in range(N + 1, n_max + 1):
            vals[n] = (1 - 2 * (l + 1) * q[n - 1] ** -0.5) * vals[n - 1]
        sum_value = sum((l + 1) * q[n + 1] ** -0.5 for n in range(N, n_max + 1))
        threshold_log = relaxation * 100 / epsilon * (l + 1) * math.log(q[N + 1])
        threshold_ok = log_lambda > threshold_log
    elif cls == "Cinf":
        delta = float(params.get("delta", 0.5))
        e = -(1 - math.sqrt(delta))
        prev = log_lambda
        for n in range(N, n_max + 1):
            prev = prev - 10 * q[n - 1] ** e
            vals[n] = prev
        sum_value = sum(10 * q[n - 1] ** e for n in range(N, n_max + 1))
    elif cls == "Gevrey":
        s = float(params.get("s", 2.0))
        kind = params.get("frequency_class", "DC")
        if kind == "DC":
            e = float(params.get("tau", 1.0)) / (s - 1) - 1
        elif kind == "SDC":
            e = (2 - s) / (2 * (s - 1))
        else:
            raise ValueError(f"unknown frequency class {kind!r}")
        tilde = {}
        prev = log_lambda
        for n in range(N, n_max + 1):
            step = 2000 * q[n - 1] ** e
            vals[n] = prev - step
            tilde[n] = prev + step
            prev = vals[n]
        sum_value = sum(2000 * q[n - 1] ** e for n in range(N, n_max + 1))
    else:
        raise ValueError(f"unknown class {cls!r}")
    bad = [n for n, v in vals.items() if v <= 0]
    if bad:
        notes.append(f"lambda_n <= 1 at levels {bad}: outside the construction's regime")
    return LambdaSchedule(cls, log_lambda, N, n_max, vals, tilde, epsilon,
                          sum_value, epsilon / 8, threshold_log, threshold_ok, notes)
