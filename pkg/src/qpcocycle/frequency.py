"""Continued fractions, convergents and arithmetic classification of frequencies.

Everything here is exact: quotients and convergents are Python integers and
the truncated frequency is a ``Fraction``.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction


class FiniteExpansion(ValueError):
    """Raised when a rational input runs out of quotients before ``depth``."""


class LevelError(ValueError):
    """Raised when a level query reaches past the usable part of a table."""


@dataclass(frozen=True)
class PartialQuotients:
    a0: int
    quotients: tuple[int, ...]
    finite: bool = False

    def __post_init__(self):
        object.__setattr__(self, "quotients", tuple(int(a) for a in self.quotients))
        if not self.quotients:
            raise ValueError("need at least one partial quotient")
        if any(a < 1 for a in self.quotients):
            raise ValueError("partial quotients a_k (k >= 1) must be >= 1")

    @property
    def depth(self) -> int:
        return len(self.quotients)

    def value(self) -> Fraction:
        x = Fraction(self.quotients[-1])
        for a in reversed(self.quotients[:-1]):
            x = a + 1 / x
        return self.a0 + 1 / x

    def __str__(self):
        return f"[{self.a0}; " + ", ".join(map(str, self.quotients)) + "]"


def expand_real(x: Fraction, depth: int) -> PartialQuotients:
    """Gauss-map expansion of ``x`` in (0, 1) to ``depth`` quotients.

    A rational input terminates. Its canonical expansion ``[..., a_m]`` with
    ``a_m >= 2`` has the twin ``[..., a_m - 1, 1]``, so depths up to ``m + 1``
    are honoured and the canonical expansion is returned with ``finite=True``.
    Deeper requests raise ``FiniteExpansion``.
    """
    x = Fraction(x)
    if not 0 < x < 1:
        raise ValueError("x must lie in (0, 1)")
    if depth < 1:
        raise ValueError("depth must be positive")
    out = []
    while len(out) < depth:
        if x == 0:
            break
        y = 1 / x
        a = math.floor(y)
        out.append(a)
        x = y - a
    if x != 0:
        return PartialQuotients(0, tuple(out))
    longest = len(out) + (1 if out[-1] >= 2 else 0)
    if depth > longest:
        raise FiniteExpansion(f"expansion {PartialQuotients(0, tuple(out), True)} "
                              f"has only {len(out)} quotients")
    return PartialQuotients(0, tuple(out), finite=True)


@dataclass(frozen=True)
class ConvergentTable:
    """Rows ``n = 0..M`` of ``p_n, q_n`` and ``z_n = q_n * alpha - p_n``.

    ``alpha`` is the truncation ``p_M / q_M``. Standard seeds are used:
    ``p_{-2}=0, p_{-1}=1, q_{-2}=1, q_{-1}=0``.
    """

    pq: PartialQuotients
    p: tuple[int, ...]
    q: tuple[int, ...]
    alpha: Fraction
    z: tuple[Fraction, ...]

    @property
    def M(self) -> int:
        return self.pq.depth

    def a(self, n: int) -> int:
        return self.pq.a0 if n == 0 else self.pq.quotients[n - 1]

    def check_level(self, n: int, reach: int = 3):
        if n < 0 or n + reach > self.M:
            raise LevelError(f"level {n} needs n + {reach} <= M = {self.M}")

    def absz(self, n: int) -> Fraction:
        if n == -1:
            return Fraction(1)
        return abs(self.z[n])

    def b(self, n: int) -> Fraction:
        """Half-width of the symmetric critical interval at level ``n``."""
        return (self.absz(n) + self.absz(n + 1)) / 2

    def rows(self):
        return [{"n": n, "p": self.p[n], "q": self.q[n],
                 "z_num": self.z[n].numerator, "z_den": self.z[n].denominator}
                for n in range(self.M + 1)]


def convergents(pq: PartialQuotients) -> ConvergentTable:
    a = [pq.a0, *pq.quotients]
    p, q = [], []
    pm2, pm1, qm2, qm1 = 0, 1, 1, 0
    for ak in a:
        pn, qn = ak * pm1 + pm2, ak * qm1 + qm2
        p.append(pn)
        q.append(qn)
        pm2, pm1, qm2, qm1 = pm1, pn, qm1, qn
    alpha = Fraction(p[-1], q[-1])
    z = tuple(qn * alpha - pn for pn, qn in zip(p, q))
    return ConvergentTable(pq, tuple(p), tuple(q), alpha, z)


def best_approximation_ok(table: ConvergentTable, n: int) -> bool:
    """Brute force: no ``0 < q < q_{n+1}`` beats ``|q_n alpha - p_n|``."""
    alpha = table.alpha
    target = abs(table.z[n])
    for qq in range(1, table.q[n + 1]):
        if qq == table.q[n]:
            continue
        d = qq * alpha
        dist = abs(d - round(d))
        if dist < target:
            return False
    return True


# -- classification --------------------------------------------------------

@dataclass(frozen=True)
class FrequencyClassReport:
    levels: tuple[int, ...]
    beta_hat: float
    beta_delta_hat: float
    bounded_M_hat: float
    sdc_pass: tuple[bool, ...]
    dc_pass: tuple[bool, ...]
    caveat: str = ("finite-truncation estimates over the listed levels only; "
                   "they suggest but never prove membership of a class")

    def to_dict(self):
        return {"levels": list(self.levels), "beta_hat": self.beta_hat,
                "beta_delta_hat": self.beta_delta_hat,
                "bounded_M_hat": self.bounded_M_hat,
                "sdc_pass": list(self.sdc_pass), "dc_pass": list(self.dc_pass),
                "caveat": self.caveat}


def _ratio(a: int, b: int) -> float:
    try:
        return a / b
    except OverflowError:
        return math.inf


def classify(table: ConvergentTable, gamma: float, tau: float, delta: float = 0.5,
             M: int | None = None) -> FrequencyClassReport:
    """Finite-depth arithmetic indicators over levels ``0..M-1``.

    Per level ``n`` the strong Diophantine test is
    ``q_{n+1} <= q_n (log q_n)^tau / gamma`` and the Diophantine test is
    ``q_{n+1} <= q_n^tau / gamma``.
    """
    if not (0 < gamma and tau > 0 and 0 < delta < 1):
        raise ValueError("need gamma > 0, tau > 0, 0 < delta < 1")
    top = table.M if M is None else min(M, table.M)
    q = table.q
    levels = tuple(range(top))
    if not levels:
        raise ValueError("table too short to classify")
    # compare in log space: tower rules produce q_n far beyond float range
    lq = [math.log(v) for v in q[:top + 1]]
    beta = max(lq[n + 1] / q[n] for n in levels)
    beta_d = max(lq[n + 1] * math.exp(-delta * lq[n]) for n in levels)
    bounded = max(_ratio(q[n + 1], q[n]) for n in levels)
    lg = math.log(gamma)
    sdc = tuple(lq[n] > 0 and lg + lq[n + 1] <= lq[n] + tau * math.log(lq[n]) + 1e-12
                for n in levels)
    dc = tuple(lg + lq[n + 1] <= tau * lq[n] + 1e-12 for n in levels)
    return FrequencyClassReport(levels, beta, beta_d, bounded, sdc, dc)


# -- synthesis -------------------------------------------------------------

GOLDEN = {"kind": "constant", "a": 1}
SILVER = {"kind": "constant", "a": 2}
MAX_TOWER_EXPONENT = 10**6


def synthesize(rule: dict, depth: int, seed: int | None = None) -> PartialQuotients:
    """Build ``a_1..a_depth`` from a rule dictionary.

    Kinds: ``constant(a)``, ``pattern(pattern)``, ``spike(base, positions,
    factor)``, ``random(low, high, seed)``, ``explicit(quotients)``,
    ``square`` (a_{k+1} = q_k) and ``tower(base)`` (a_{k+1} = base**q_k).
    """
    kind = rule.get("kind")
    if depth < 1:
        raise ValueError("depth must be positive")
    a: list[int] = []
    if kind == "constant":
        a = [int(rule["a"])] * depth
    elif kind == "pattern":
        pat = [int(v) for v in rule["pattern"]]
        if rule.get("repeat", True):
            a = [pat[k % len(pat)] for k in range(depth)]
        else:
            a = (pat + [1] * depth)[:depth]
    elif kind == "explicit":
        a = [int(v) for v in rule["quotients"]][:depth]
        if len(a) < depth:
            raise ValueError("explicit rule shorter than requested depth")
    elif kind == "random":
        s = rule.get("seed", seed)
        rng = random.Random(0 if s is None else int(s))
        lo, hi = int(rule.get("low", 1)), int(rule.get("high", 9))
        a = [rng.randint(lo, hi) for _ in range(depth)]
    elif kind in ("spike", "square", "tower"):
        base = int(rule.get("base", 1))
        positions = set(int(k) for k in rule.get("positions", ()))
        factor = float(rule.get("factor", 1))
        q_prev, q_prev2 = 1, 0  # q_0, q_{-1}
        for k in range(1, depth + 1):
            if kind == "spike":
                if k in positions:
                    ak = max(base, math.ceil((factor * q_prev - q_prev2) / q_prev))
                else:
                    ak = base
            elif kind == "square":
                ak = q_prev
            else:
                if base > 1 and q_prev > MAX_TOWER_EXPONENT:
                    raise ValueError(f"tower quotient {base}**{q_prev} is beyond the resource cap")
                ak = base ** q_prev
            a.append(ak)
            q_prev, q_prev2 = ak * q_prev + q_prev2, q_prev
    else:
        raise ValueError(f"unknown frequency rule {kind!r}")
    return PartialQuotients(0, tuple(a))


def parse_frequency(text: str, depth: int | None = None) -> PartialQuotients:
    """Accept ``golden``, ``silver``, ``P/Q``, ``[0;a1,...]`` or a JSON rule."""
    text = text.strip()
    d = 16 if depth is None else depth
    if text == "golden":
        return synthesize(GOLDEN, d)
    if text == "silver":
        return synthesize(SILVER, d)
    if text.startswith("["):
        head, _, tail = text.strip("[]").partition(";")
        quot = [int(v) for v in tail.replace(" ", "").split(",") if v]
        return PartialQuotients(int(head), tuple(quot))
    if text.startswith("{"):
        rule = json.loads(text)
        return synthesize(rule, int(rule.get("depth", d)))
    return expand_real(Fraction(text), d)
