import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpcocycle.frequency import GOLDEN, SILVER, PartialQuotients, convergents, synthesize
from qpcocycle.orbit import (DomainError, CapError, arc_samples, brute_return_times,
                             critical_interval, first_entry_time, first_entry_times, locate,
                             locate_scan, return_map_image, return_time_brute,
                             return_time_closed, self_return_times, subintervals,
                             symmetric_return_profile, three_distance)

GOLD = convergents(synthesize(GOLDEN, 16))
SPIKE = convergents(synthesize({"kind": "spike", "base": 1, "positions": [5], "factor": 200}, 12))


def test_zero_returns_fast_at_even_level():
    for n in (2, 4, 6):
        assert return_time_closed(0, GOLD, n) == (GOLD.q[n], "I0")


def test_left_end_of_star_piece():
    n = 4
    x = GOLD.absz(n + 1)
    assert return_time_closed(x, GOLD, n) == (GOLD.q[n + 1], "I*")
    assert return_time_brute(x, GOLD, n) == GOLD.q[n + 1]


def test_outside_interval_raises():
    with pytest.raises(DomainError):
        return_time_closed(Fraction(1, 2), GOLD, 4)
    with pytest.raises(DomainError):
        return_time_brute(Fraction(1, 2), GOLD, 4)


@pytest.mark.parametrize("table", [GOLD, SPIKE, convergents(synthesize(SILVER, 12))])
@pytest.mark.parametrize("direction", ["forward", "backward"])
def test_closed_form_matches_brute_force(table, direction):
    for n in range(2, table.M - 2):
        arc = critical_interval(table, n)
        for tag, piece in subintervals(table, n).items():
            xs = arc_samples(piece, 7)
            brute = brute_return_times(xs, table.alpha, arc, direction)
            for x, tb in zip(xs, brute):
                tc, got = return_time_closed(x, table, n, direction)
                assert got == tag
                assert tc == tb


@settings(max_examples=300, deadline=None)
@given(st.integers(min_value=2, max_value=10), st.fractions(min_value=0, max_value=1))
def test_locate_agrees_with_scan(n, u):
    arc = critical_interval(SPIKE if n <= 8 else GOLD, n)
    table = SPIKE if n <= 8 else GOLD
    x = arc.lo + arc.length * u
    if not arc.contains(x):
        with pytest.raises(DomainError):
            locate(x, table, n)
        return
    assert locate(x, table, n) == locate_scan(x, table, n)


def test_partition_covers_interval():
    for n in (2, 3, 4):
        parts = subintervals(SPIKE, n)
        total = sum((p.length for p in parts.values()), Fraction(0))
        assert total == critical_interval(SPIKE, n).length
        assert len(parts) == SPIKE.a(n + 2) + 2


def test_return_map_images():
    for n in (2, 3):
        assert return_map_image(SPIKE, n, "I0").image == subintervals(SPIKE, n)["I1"]
    # a_5 >= 200, so at level 3 the chain I1 -> I2 -> ... is long
    assert return_map_image(SPIKE, 3, "I1").target == ("I2",)
    assert return_map_image(SPIKE, 3, "I1").image == subintervals(SPIKE, 3)["I2"]
    for n in (2, 3):
        for tag in subintervals(SPIKE, n):
            assert return_map_image(SPIKE, n, tag).holds
    with pytest.raises(KeyError):
        return_map_image(GOLD, 2, "I9")


def test_three_distance_golden_level_two():
    r = three_distance(GOLD, 2)
    assert len(r.points) == 3
    assert set(r.gaps) <= {GOLD.absz(2), GOLD.absz(2) + GOLD.absz(3)}
    assert r.ok


@pytest.mark.parametrize("table", [GOLD, SPIKE])
def test_three_distance_large_gap_count(table):
    for n in range(1, table.M - 2):
        r = three_distance(table, n)
        assert r.ok
        assert r.count_large == table.q[n]
        assert r.count_small == table.q[n + 1] - table.q[n]


def test_first_entry():
    n = 4
    assert first_entry_time(0, GOLD, n) == 0
    assert first_entry_time(GOLD.b(n) / 2, GOLD, n) == 0
    assert first_entry_time(Fraction(1, 2), GOLD, n) < GOLD.q[5] == 8
    rng = random.Random(3)
    xs = [Fraction(rng.randrange(10**6), 10**6) for _ in range(1000)]
    assert max(first_entry_times(xs, GOLD, n)) < GOLD.q[n + 1]


@pytest.mark.parametrize("table", [GOLD, SPIKE])
def test_self_returns(table):
    for n in range(2, table.M - 3):
        i0 = subintervals(table, n)["I0"]
        times = set(self_return_times(arc_samples(i0, 20), table, n))
        assert times <= {table.q[n + 2], table.q[n + 2] + table.q[n + 1]}


def test_cap_error():
    t = convergents(PartialQuotients(0, (2, 3, 4)))
    arc = critical_interval(t, 0)
    with pytest.raises(CapError):
        brute_return_times([Fraction(1, 2)], t.alpha, arc, "forward", cap=1)


def test_symmetric_profile_has_two_values():
    for n in (2, 3, 4, 5):
        prof = symmetric_return_profile(GOLD, n, 60)
        for direction in ("forward", "backward"):
            d = prof[direction]
            assert set(d["values"]) <= {GOLD.q[n], GOLD.q[n + 1]}
            assert d["fast_runs"] == 1
