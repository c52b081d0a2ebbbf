"""Time the compiled product kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--steps 2000] [--rows 256] [--repeat 5]
"""
import argparse
import math
import timeit

import numpy as np

from qpcocycle import _fallback

try:
    from qpcocycle import _kernels
except ImportError:  # extension not built
    _kernels = None


def cases(steps: int, rows: int):
    rng = np.random.default_rng(0)
    psi = rng.uniform(-math.pi, math.pi, (rows, steps))
    w = rng.uniform(-3, 3, (rows, steps))
    mats = np.ascontiguousarray(
        np.stack([w, -np.ones_like(w), np.ones_like(w), np.zeros_like(w)], axis=-1))
    lg = math.log(50.0)
    return {
        "rothyp_lognorms": lambda k: k.rothyp_lognorms(psi, lg),
        "rothyp_partial_lognorms": lambda k: k.rothyp_partial_lognorms(psi[0], lg),
        "rothyp_product": lambda k: k.rothyp_product(psi[0], lg),
        "general_lognorms": lambda k: k.general_lognorms(mats),
        "general_product": lambda k: k.general_product(mats[0]),
    }


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--rows", type=int, default=256)
    p.add_argument("--repeat", type=int, default=5)
    a = p.parse_args(argv)
    backends = {"python": _fallback}
    if _kernels is not None:
        backends["cython"] = _kernels
    else:
        print("compiled kernels not built; timing the fallback only")
    print(f"{'kernel':26s}" + "".join(f"{b:>14s}" for b in backends) + f"{'speedup':>10s}")
    for name, fn in cases(a.steps, a.rows).items():
        best = {b: min(timeit.repeat(lambda: fn(k), number=1, repeat=a.repeat))
                for b, k in backends.items()}
        line = f"{name:26s}" + "".join(f"{best[b] * 1e3:12.2f}ms" for b in backends)
        if "cython" in best:
            line += f"{best['python'] / best['cython']:9.1f}x"
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
