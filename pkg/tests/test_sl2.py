import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpcocycle.sl2 import (LogScaledMat2, angle_between, check_mu_hyperbolic, compose, diag,
                           derivative_drift_check, faa_di_bruno_closed,
                           faa_di_bruno_partition_sum, from_frame, multiplicity_partitions,
                           nonresonant_product_check, product, reconstruct, reduce_angle,
                           resonant_cancellation_check, rotation, run_lemma_trials, svd_frame)

angles = st.floats(min_value=0, max_value=math.pi, exclude_max=True)
log_norms = st.floats(min_value=0.0, max_value=math.log(1e4))


def rel(a, b):
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


def test_rotation_examples():
    assert np.array_equal(rotation(0.0), np.eye(2))
    assert np.allclose(rotation(math.pi / 2), [[0, -1], [1, 0]], atol=1e-16)
    for th in np.linspace(-7, 7, 15):
        assert abs(np.linalg.norm(rotation(th), 2) - 1) < 1e-15


def test_frame_of_diagonal():
    fr = svd_frame(diag(50.0))
    assert fr.u_angle == 0.0
    assert abs(fr.s_angle - math.pi / 2) < 1e-15
    assert abs(fr.log_norm - math.log(50.0)) < 1e-15
    assert fr.well_defined


def test_frame_of_rotated_diagonal():
    for phi in (0.3, 2.0, 4.0):
        fr = svd_frame(rotation(phi) @ diag(50.0))
        assert abs(reduce_angle(fr.u_angle - phi % math.pi)) < 1e-14
        assert abs(fr.s_angle - math.pi / 2) < 1e-14


def test_rotation_frame_not_defined():
    assert not svd_frame(rotation(0.7)).well_defined


@settings(max_examples=300)
@given(angles, st.floats(min_value=0.0, max_value=math.log(1e4)), angles)
def test_reconstruction_and_contraction(u, ell, s):
    a = from_frame(u, ell, s)
    fr = svd_frame(a)
    m = a.matrix()
    assert rel(reconstruct(fr), m) <= 1e-12
    s_hat = np.array([math.cos(fr.s_angle), math.sin(fr.s_angle)])
    # relative to ||A||: e^{-l} sits below double resolution once l is large
    assert abs(np.linalg.norm(m @ s_hat) - math.exp(-fr.log_norm)) <= 1e-12 * math.exp(fr.log_norm)


@settings(max_examples=200)
@given(st.lists(st.tuples(angles, log_norms, angles), min_size=1, max_size=30))
def test_log_scaled_invariants(frames):
    acc = product(from_frame(*f) for f in frames)
    unit_norm = np.linalg.norm(acc.unit, 2)
    assert 1 - 1e-12 <= unit_norm < 2 + 1e-12
    # det(unit) = 4^{-exponent} is tiny for large norms; its rounding error is
    # about eps ||unit||^2, so the log-domain check is scaled by ||A||^2
    det = np.linalg.det(acc.unit)
    tol = 1e-9 * len(frames) * max(1.0, math.exp(2 * acc.log_norm()) * 1e-7)
    if acc.log_norm() < 12:
        assert abs(2 * acc.logscale + math.log(abs(det))) <= tol
    if acc.log_norm() < 10:
        # rounding in A^{-1} A grows like cond(A) = ||A||^2
        err = rel(compose(acc.inverse(), acc).matrix(), np.eye(2))
        assert err < 1e-13 * len(frames) * math.exp(2 * acc.log_norm())


def test_compose_identity_and_powers():
    a = from_frame(0.4, 3.0, 1.1)
    assert rel(compose(LogScaledMat2.identity(), a).matrix(), a.matrix()) < 1e-15
    p = product([diag(2.0)] * 10_000)
    assert abs(p.log_norm() - 10_000 * math.log(2)) < 1e-6


@settings(max_examples=200)
@given(st.lists(st.tuples(angles, log_norms, angles), min_size=3, max_size=3))
def test_associativity(frames):
    a, b, c = (from_frame(*f) for f in frames)
    left = compose(compose(c, b), a)
    right = compose(c, compose(b, a))
    # rounding of a product is relative to ||C|| ||B|| ||A||, not to ||CBA||
    scale = math.exp(a.log_norm() + b.log_norm() + c.log_norm())
    assert np.max(np.abs(left.matrix() - right.matrix())) <= 1e-10 * scale


def test_diagonal_log_scales_add_exactly():
    acc = LogScaledMat2.identity()
    for k in range(1, 200):
        acc = compose(LogScaledMat2.from_matrix(diag(3.0)), acc)
        assert abs(acc.log_norm() - k * math.log(3.0)) <= 1e-12 * k * math.log(3.0)


def test_angle_between_examples():
    d = svd_frame(diag(100.0))
    assert abs(angle_between(d, d) - math.pi / 2) < 1e-15
    a = from_frame(0.7, 5.0, 0.2)
    b = from_frame(1.3, 4.0, svd_frame(a).u_angle)
    assert abs(angle_between(svd_frame(a), svd_frame(b))) < 1e-12


@given(angles, angles)
def test_angle_range(x, y):
    th = reduce_angle(x - y)
    assert -math.pi / 2 < th <= math.pi / 2


def test_nonresonant_quarter_twist():
    e1 = from_frame(0.0, math.log(1e4), math.pi / 2)
    e2 = from_frame(0.0, math.log(1e4), math.pi / 4)
    rep = nonresonant_product_check(e1, e2, 0.009)
    # pi/4 is below e0^{-eta} = 1e4^{-0.009} ~ 0.92, so it is flagged; the bound still holds
    assert not rep.precondition
    assert abs(rep.theta - math.pi / 4) < 1e-12
    assert rep.norm_error <= 10 * 1e4 ** -0.5
    assert rep.holds


def test_nonresonant_orthogonal_frames():
    d = LogScaledMat2.from_matrix(diag(1e4))
    rep = nonresonant_product_check(d, d, 0.009)
    assert abs(rep.theta - math.pi / 2) < 1e-15
    assert rep.norm_error <= 1e4 ** -0.5
    assert rep.holds


def test_nonresonant_precondition_flagged():
    e1 = from_frame(0.0, math.log(1e4), math.pi / 2)
    e2 = from_frame(0.0, math.log(1e4), 1e-4)
    assert not nonresonant_product_check(e1, e2, 0.009).precondition
    with pytest.raises(ValueError):
        nonresonant_product_check(e1, e2, 0.5)


def test_resonant_exact_diagonal():
    rep = resonant_cancellation_check(diag(1e6), diag(1e-6))
    assert rep.misalignment == 0.0
    assert abs(rep.log_norm) < 1e-12
    assert rep.holds


def test_resonant_aligned_and_misaligned():
    rng = np.random.default_rng(11)
    bad = 0
    for _ in range(200):
        a = from_frame(rng.uniform(0, math.pi), math.log(1e8), rng.uniform(0, math.pi))
        ua = svd_frame(a).u_angle
        b = from_frame(rng.uniform(0, math.pi), math.log(1e5), ua)
        assert resonant_cancellation_check(a, b).holds
        b_off = from_frame(rng.uniform(0, math.pi), math.log(1e5), ua + 1e-3)
        bad += not resonant_cancellation_check(a, b_off).holds
    assert bad >= 1


@pytest.mark.parametrize("eps", [0.0, 0.1, 0.5, 1.0])
def test_hyperbolic_constant_blocks(eps):
    assert check_mu_hyperbolic([diag(7.0)] * 25, 7.0, 7.0, eps).passes


def test_hyperbolic_rotation_inserted():
    mu = 7.0
    blocks = [diag(mu)] * 5 + [rotation(math.pi / 2)] + [diag(mu)] * 5
    assert check_mu_hyperbolic(blocks[:5], mu, mu, 0.1).passes
    rep = check_mu_hyperbolic(blocks[:6], mu, mu, 0.1)
    # the backward pass meets the rotation first
    assert not rep.passes and rep.direction == "backward" and rep.fail_index == 1
    assert not check_mu_hyperbolic(blocks, mu, mu, 0.1).passes


@settings(max_examples=50)
@given(st.lists(st.tuples(angles, st.floats(0.1, 3.0), angles), min_size=1, max_size=20))
def test_hyperbolic_eps_one_always_passes(frames):
    mats = [from_frame(*f) for f in frames]
    lam = math.exp(max(f[1] for f in frames)) * (1 + 1e-9)
    assert check_mu_hyperbolic(mats, min(lam, 1.5), lam, 1.0).passes


def test_hyperbolic_step_norm_bound():
    assert not check_mu_hyperbolic([diag(9.0)], 2.0, 3.0, 0.0).passes
    with pytest.raises(ValueError):
        check_mu_hyperbolic([diag(2.0)], 3.0, 2.0, 0.0)


def test_faa_di_bruno_examples():
    assert faa_di_bruno_partition_sum(1, 5) == 5
    assert faa_di_bruno_partition_sum(3, 2) == 18
    assert faa_di_bruno_partition_sum(12, Fraction(1, 2)) == Fraction(1, 2) * Fraction(3, 2) ** 11
    assert len(list(multiplicity_partitions(3))) == 3


@pytest.mark.parametrize("r", [1, 2, Fraction(1, 2), 5])
def test_faa_di_bruno_identity(r):
    for n in range(1, 13):
        assert faa_di_bruno_partition_sum(n, r) == faa_di_bruno_closed(n, r)


def test_drift_constant_fields():
    rep = derivative_drift_check(lambda t: diag(100.0), lambda t: diag(100.0), 0.2)
    assert not rep.inconclusive
    assert all(abs(rep.derivatives[f"d{k}_{nm}"]) < 1e-6
               for k in (1, 2) for nm in ("log_norm", "u_angle", "s_angle"))


def test_drift_rotating_field():
    lam = 1e3
    rep = derivative_drift_check(lambda t: diag(lam) @ rotation(math.pi / 2 - t),
                                 lambda t: diag(lam), 0.3)
    e3 = math.exp(rep.derivatives["log_norm"])
    # d/dt log e3 = d/dt log|sin(theta)| stays O(1), far below e3^{eta}
    assert abs(rep.derivatives["d1_log_norm"]) <= e3 ** 0.3


@pytest.mark.parametrize("lemma", ["basic", "resonant", "hyperbolic", "faa"])
def test_lemma_trials_small(lemma):
    rep = run_lemma_trials(lemma, 300, 5)
    assert rep["violations"] == 0 and rep["trials"] == 300
    with pytest.raises(ValueError):
        run_lemma_trials("nope", 1, 1)
