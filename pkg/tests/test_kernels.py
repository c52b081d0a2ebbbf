import math

import numpy as np
import pytest

from qpcocycle import _fallback, kernels

try:
    from qpcocycle import _kernels as compiled
except ImportError:  # extension not built
    compiled = None

needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled kernels not built")


def _psi(shape, seed=0):
    return np.random.default_rng(seed).uniform(-math.pi, math.pi, shape)


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")


@needs_compiled
def test_rothyp_product_matches():
    psi = _psi(500)
    m1, e1 = compiled.rothyp_product(psi, math.log(40.0))
    m2, e2 = _fallback.rothyp_product(psi, math.log(40.0))
    assert e1 == e2
    assert np.allclose(m1, m2, rtol=1e-12, atol=1e-15)


@needs_compiled
def test_rothyp_lognorms_match():
    psi = _psi((17, 300), 1)
    a = compiled.rothyp_lognorms(psi, math.log(12.0))
    b = _fallback.rothyp_lognorms(psi, math.log(12.0))
    assert np.allclose(a, b, rtol=1e-12)


@needs_compiled
def test_partial_lognorms_match():
    psi = _psi(200, 2)
    a = compiled.rothyp_partial_lognorms(psi, math.log(3.0))
    b = _fallback.rothyp_partial_lognorms(psi, math.log(3.0))
    assert np.allclose(a, b, rtol=1e-12)


@needs_compiled
def test_general_kernels_match():
    rng = np.random.default_rng(3)
    w = rng.uniform(-3, 3, (9, 120))
    mats = np.stack([w, -np.ones_like(w), np.ones_like(w), np.zeros_like(w)], axis=-1)
    a = compiled.general_lognorms(np.ascontiguousarray(mats))
    b = _fallback.general_lognorms(mats)
    assert np.allclose(a, b, rtol=1e-12)
    m1, e1 = compiled.general_product(np.ascontiguousarray(mats[0]))
    m2, e2 = _fallback.general_product(mats[0])
    assert e1 == e2 and np.allclose(m1, m2, rtol=1e-12, atol=1e-15)


def test_fallback_flat_angle():
    # psi = 0 gives diag(lam, 1/lam)^N
    ln = _fallback.rothyp_lognorms(np.zeros((2, 50)), math.log(7.0))
    assert np.allclose(ln, 50 * math.log(7.0), rtol=1e-14)
