import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import desk_ledger
from qpcocycle.construction import (Bump, CinfSample, ClSample, ConstantSample, CorrectionLedger,
                                    GevreySample, PreconditionError, StepOptions, bump,
                                    build_phi_n, build_phi_tilde_n, cancellation_profile,
                                    exceptional_set, gevrey_seminorm, lambda_schedule,
                                    le_gap_experiment, make_sample)
from qpcocycle.frequency import GOLDEN, convergents, synthesize

GOLD = convergents(synthesize(GOLDEN, 20))
TWO_PI = 2 * math.pi


# -- sample functions ------------------------------------------------------

def test_cl_sample_near_zero():
    f = ClSample()
    t = np.linspace(-0.3 / TWO_PI, 0.3 / TWO_PI, 41)
    assert np.allclose(f(t), (TWO_PI * np.abs(t)) ** 2, rtol=1e-13, atol=1e-300)
    assert f(0.0) == 0.0
    f3 = ClSample(l=3, delta0=0.3, ramp_end=0.9)
    assert abs(f3(0.01) - (TWO_PI * 0.01) ** 4) < 1e-15


def test_cl_sample_shape():
    f = ClSample()
    t = np.linspace(0, 1, 2001)[1:-1]
    v = f(t)
    assert np.all(v > 0) and np.all(v < math.pi / 2)
    assert np.allclose(f(-t), v, rtol=0, atol=1e-15)
    assert np.allclose(f(t + 3), v, rtol=0, atol=1e-14)


@pytest.mark.parametrize("sample", [ClSample(), CinfSample(), GevreySample(),
                                    Bump(0.2, 2.0)])
def test_derivatives_match_finite_differences(sample):
    rng = np.random.default_rng(5)
    h = 1e-6
    for t in rng.uniform(0.02, 0.48, 25):
        for k in (1, 2):
            fd = (sample.derivative(t + h, k - 1) - sample.derivative(t - h, k - 1)) / (2 * h)
            ref = sample.derivative(t, k)
            assert abs(fd - ref) <= 1e-5 * max(1.0, abs(ref))


def test_cl_seam_is_continuous():
    f = ClSample()
    seam = 0.3 / TWO_PI
    for k in (0, 1, 2):
        left, right = f.derivative(seam - 1e-9, k), f.derivative(seam + 1e-9, k)
        assert abs(left - right) <= 1e-5 * max(1.0, abs(left))


@pytest.mark.parametrize("sample", [CinfSample(), GevreySample(), CinfSample(3.0),
                                    GevreySample(1.5)])
def test_flat_samples_vanish_only_at_zero(sample):
    assert sample(0.0) == 0.0
    t = np.linspace(0, 1, 1001)[1:-1]
    assert np.all(sample(t) >= 0)
    # away from the zero nothing underflows
    assert np.all(sample(t[(t > 0.1) & (t < 0.9)]) > 0)
    # 1 - t rounds, and the steep exponent amplifies that relative error
    assert np.allclose(sample(1 - t), sample(t), rtol=1e-9, atol=0)


def test_sample_formulas():
    t = 0.3
    y = TWO_PI * t
    want = math.exp(-math.log(8 * math.pi / y) ** 2 - math.log(8 * math.pi / (TWO_PI - y)) ** 2)
    assert abs(CinfSample()(t) - want) <= 1e-15
    assert abs(GevreySample()(t) - math.exp(-1 / y - 1 / (TWO_PI - y))) <= 1e-15


def test_make_sample_and_errors():
    assert isinstance(make_sample("Cl", {"l": 2}), ClSample)
    assert make_sample("constant", {"value": 1.0})(0.4) == 1.0
    with pytest.raises(ValueError):
        make_sample("nope")
    with pytest.raises(ValueError):
        ClSample(l=0)
    with pytest.raises(ValueError):
        CinfSample(1.0)
    with pytest.raises(ValueError):
        GevreySample(1.0)
    with pytest.raises(ValueError):
        ClSample().derivative(0.1, 9)


def test_bump_profile():
    b = 0.1
    f = Bump(b, 2.0)
    assert f(0.0) == 1.0
    inner = np.linspace(-b / 10, b / 10, 51)
    assert np.all(f(inner) == 1.0)
    outer = np.concatenate([np.linspace(b / 5, 0.5, 51), -np.linspace(b / 5, 0.5, 51)])
    assert np.all(f(outer) == 0.0)
    ramp = f(np.linspace(b / 10, b / 5, 400))
    assert np.all(np.diff(ramp) <= 1e-15)
    assert np.array_equal(f.support_mask(np.array([0.0, b / 5, -b / 6])), [True, False, True])


def test_bump_factory():
    f = bump(3, 2.0, GOLD)
    assert f.b == float(GOLD.b(3))
    for nu in (1.0, 0.5):
        with pytest.raises(ValueError):
            bump(3, nu, GOLD)


# -- schedule --------------------------------------------------------------

def test_cl_schedule_golden():
    sch = lambda_schedule("Cl", math.log(30.0), 3, 6, GOLD, {"l": 1})
    assert abs(sch.log_values[3] - (math.log(30.0) + 2 * math.log(GOLD.b(3)))) < 1e-14
    assert abs(sch.lam(3) - 30 * float(GOLD.b(3)) ** 2) < 1e-12
    # lambda = 30 is far too small here: lambda_3 < 1 and the notes say so
    assert sch.log_values[3] < 0 and sch.notes
    assert not sch.monotone()
    big = lambda_schedule("Cl", math.log(1e6), 8, 12, GOLD, {"l": 1})
    assert big.monotone() and not big.notes
    assert sch.sum_bound == 0.1 / 8
    assert sch.sum_ok == (sch.sum_value <= sch.sum_bound)
    assert sch.threshold_ok is False


@pytest.mark.parametrize("cls,params", [("Cinf", {"delta": 0.5}),
                                        ("Gevrey", {"s": 2.0, "tau": 1.0}),
                                        ("Gevrey", {"s": 1.5, "frequency_class": "SDC"})])
def test_flat_class_schedules(cls, params):
    sch = lambda_schedule(cls, math.log(1e6), 2, 8, GOLD, params)
    assert sch.monotone()
    assert sch.log_values[2] < math.log(1e6)
    if cls == "Gevrey":
        for n in range(2, 9):
            assert sch.log_tilde[n] > sch.log_values[n]
    json.dumps(sch.to_dict())


def test_schedule_errors():
    with pytest.raises(ValueError):
        lambda_schedule("Cl", 0.0, 2, 4, GOLD)
    with pytest.raises(ValueError):
        lambda_schedule("Cl", 1.0, 5, 4, GOLD)
    with pytest.raises(ValueError):
        lambda_schedule("nope", 1.0, 2, 4, GOLD)
    with pytest.raises(ValueError):
        lambda_schedule("Gevrey", 1.0, 2, 4, GOLD, {"frequency_class": "weird"})


# -- exceptional set -------------------------------------------------------

@pytest.mark.parametrize("n", [2, 4, 6, 8, 10])
def test_exceptional_measure(n):
    bset = exceptional_set(GOLD, n)
    q = GOLD.q[n + 1]
    assert bset.count == math.isqrt(q ** 3)
    assert bset.measure <= bset.measure_bound
    assert float(bset.measure) <= 2 * q ** -0.5
    for (a, b), (c, d) in zip(bset.intervals, bset.intervals[1:]):
        assert a < b <= c < d


def test_exceptional_single_ball():
    n = 6
    bset = exceptional_set(GOLD, n, count=1)
    q = GOLD.q[n + 1]
    assert len(bset.intervals) == 1
    lo, hi = bset.intervals[0]
    assert hi - lo == Fraction(2, q * q)
    assert bset.contains_exact(-GOLD.alpha)
    assert not bset.contains_exact(0)


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 10), st.fractions(0, 1, max_denominator=10**9))
def test_exceptional_float_and_exact_membership_agree(n, x):
    bset = exceptional_set(GOLD, n)
    fx = float(x)
    # skip points within float resolution of an endpoint
    if any(abs(fx - float(e)) < 1e-12 for iv in bset.intervals for e in iv):
        return
    assert bool(bset.contains(fx)) == bset.contains_exact(x)


# -- Gevrey seminorm -------------------------------------------------------

class _Sine:
    def jet(self, t, order):
        t = np.asarray(t)
        return np.stack([TWO_PI ** k * np.sin(TWO_PI * t + k * math.pi / 2)
                         for k in range(order + 1)])


def test_gevrey_seminorm_constant():
    r = gevrey_seminorm(ConstantSample(-2.5), 2.0, 10.0, 8)
    assert abs(r.value - 4 * math.pi ** 2 / 3 * 2.5) < 1e-12
    assert r.argmax == 0


def test_gevrey_seminorm_sine():
    r = gevrey_seminorm(_Sine(), 2.0, 1e3, 6)
    assert r.argmax == 0
    assert abs(r.value - 4 * math.pi ** 2 / 3) < 1e-6
    small = gevrey_seminorm(_Sine(), 1.0, 1.0, 6)
    assert small.argmax > 0


def test_gevrey_seminorm_sample_and_errors():
    r = gevrey_seminorm(GevreySample(), 2.0, 50.0, 8)
    assert math.isfinite(r.value) and r.value > 0
    with pytest.raises(ValueError):
        gevrey_seminorm(GevreySample(), 2.0, 50.0, 9)
    with pytest.raises(TypeError):
        gevrey_seminorm(lambda t: t, 2.0, 50.0, 2)


# -- resonant steps --------------------------------------------------------

def _constant_ledger():
    sch = lambda_schedule("Cl", math.log(1e6), 4, 4, GOLD, {"l": 1})
    return CorrectionLedger(GOLD, ConstantSample(math.pi / 2), math.log(1e6), sch)


def test_constant_base_needs_no_correction():
    led = _constant_ledger()
    rep = build_phi_n(led, 4, StepOptions(nodes=21, verify_samples=20))
    assert rep.accepted and rep.hyperbolic and rep.support_ok
    assert rep.correction_sup == 0.0 and rep.angle_residual == 0.0
    # |z_n| overshoots the symmetric half-width, so both returns take q_{n+1}
    assert rep.return_times == (GOLD.q[5], GOLD.q[5])
    with pytest.raises(ValueError):
        build_phi_n(led, 4)


def test_tilde_requires_hat():
    with pytest.raises(ValueError):
        build_phi_tilde_n(_constant_ledger(), 4)


def test_desk_steps():
    led = desk_ledger()
    hat, tilde = led.reports
    assert (hat.kind, tilde.kind) == ("hat", "tilde")
    for rep in (hat, tilde):
        assert rep.accepted and rep.hyperbolic and rep.support_ok and rep.lower_bound_ok
        assert rep.angle_residual <= 1e-6
    json.dumps(led.to_dict())


def test_desk_corrections_stay_local():
    led = desk_ledger()
    n = led.schedule.N
    b = float(led.table.b(n))
    t = np.concatenate([np.linspace(b / 5, 1 - b / 5, 3001)])
    base = led.base(t)
    assert np.array_equal(led.phi(n)(t), base)
    assert np.array_equal(led.phi(n, tilde=True)(t), base)
    near = np.linspace(-b / 10, b / 10, 101)
    assert not np.array_equal(led.phi(n, tilde=True)(near), led.base(near))


# -- Lyapunov gap ------------------------------------------------------------

def test_gap_needs_a_spike():
    sch = lambda_schedule("Cl", math.log(100.0), 2, 2, GOLD, {"l": 1})
    led = CorrectionLedger(GOLD, ClSample(), math.log(100.0), sch)
    with pytest.raises(PreconditionError):
        le_gap_experiment(led, 2, [100])


def test_desk_gap_regression():
    led = desk_ledger()
    r = le_gap_experiment(led, 2, [500, 1000, 2000], 602)
    # frozen from a run of the experiment at the desk configuration
    assert np.allclose(r.gap_fractions,
                       [0.062234035456791154, 0.062251673908101275, 0.062257319122239876],
                       rtol=1e-9)
    assert all(g > 0 for g in r.gaps)
    ctrl = le_gap_experiment(led, 2, [500], 602, control=True)
    assert ctrl.gaps == [0.0]
    assert len(r.csv_rows()) == 3


def test_cancellation_profile_at_zero():
    led = desk_ledger()
    p = cancellation_profile(led, 2, 0)
    assert p.returns >= 10
    assert p.rate_Atilde <= 0.5 * led.log_lambda
    assert p.rate_A > p.rate_Atilde
    with pytest.raises(ValueError):
        cancellation_profile(led, 2, Fraction(1, 2))
