import math
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from oracles import fluid_delay, periodic, priority_link, saturated_service
from ncswitch.kernel import TimeBase
from ncswitch.netcalc import (ArrivalCurve as A, ServiceCurve as S, Unstable, aggregate, concatenate,
                              delay_bound, flow_arrival, leftover_service, switch_bounds)
from ncswitch.switch import SwitchConfig
from ncswitch.traffic import FlowSpec

TU = 1000
fracs = st.fractions(min_value=0, max_value=20, max_denominator=12)
pos = st.fractions(min_value=F(1, 12), max_value=20, max_denominator=12)


def flow(fid, cls, period=5, tx=2, n=1, port=0, jitter=0, phase=0):
    return FlowSpec(fid, period * TU, cls, port, port, tx * TU, phase * TU, n, jitter)


# arrival curves

def test_flow_arrival_examples():
    assert flow_arrival(flow("a", 3)) == A(2, F(2, 5))
    assert flow_arrival(flow("a", 3, n=4)) == A(8, F(8, 5))
    assert flow_arrival(FlowSpec("z", 5000, 3, 0, 0, 0)) == A(0, 0)


def test_flow_arrival_jitter_widens_burst():
    a = flow_arrival(flow("a", 3, jitter=1000))
    assert a.rho == F(2, 5) and a.sigma > 2


def test_aggregate_examples():
    assert aggregate(A(2, F(2, 5)), A(2, F(2, 5))) == A(4, F(4, 5))
    assert aggregate(A(3, F(1, 7)), A(0, 0)) == A(3, F(1, 7))
    assert aggregate(A(1, F(1, 3)), A(2, F(1, 6))) == A(3, F(1, 2))


def test_arrival_curve_value():
    a = A(4, 1)
    assert a(0) == 0 and a(F(1, 1000)) == 4 + F(1, 1000)


@given(fracs, fracs, fracs, fracs, fracs, fracs)
def test_aggregate_algebra(s1, r1, s2, r2, s3, r3):
    a, b, c = A(s1, r1), A(s2, r2), A(s3, r3)
    assert a + b == b + a
    assert (a + b) + c == a + (b + c)
    assert a + A() == a


# delay bound

def test_delay_bound_examples():
    assert delay_bound(A(0, 1), S(2, 3)) == 3
    assert delay_bound(A(4, 1), S(2, 1)) == 3
    with pytest.raises(Unstable):
        delay_bound(A(2, 3), S(2, 0))


@pytest.mark.parametrize("sigma,rho,rate,latency", [
    (4, 1, 2, 1),
    (0, 1, 2, 3),
    (2, F(2, 5), 1, 0),
    (3, F(1, 2), F(3, 2), F(1, 2)),
])
def test_delay_bound_matches_fluid_oracle(sigma, rho, rate, latency):
    assert fluid_delay(sigma, rho, rate, latency) == delay_bound(A(sigma, rho), S(rate, latency))


@given(fracs, fracs, pos, fracs, fracs, pos)
def test_delay_bound_monotone(sigma, latency, rate, dsig, dlat, drate):
    a, s = A(sigma, 0), S(rate, latency)
    d = delay_bound(a, s)
    assert delay_bound(A(sigma + dsig, 0), s) >= d
    assert delay_bound(a, S(rate, latency + dlat)) >= d
    assert delay_bound(a, S(rate + drate, latency)) <= d


# leftover service

def test_leftover_identity():
    s = S(1, F(1, 2))
    assert leftover_service(s, A(), 0) == s


def test_leftover_example():
    assert leftover_service(S(1, 0), A(2, F(2, 5)), 2) == S(F(3, 5), F(20, 3))


def test_leftover_saturation():
    with pytest.raises(Unstable):
        leftover_service(S(1, 0), A(1, 1), 0)


def test_leftover_lower_bounds_worst_case_service():
    # ticks at 10 per T.U: high period 5, frames 2 T.U, one 2 T.U low frame blocking from just before 0
    s = leftover_service(S(1, 0), A(2, F(2, 5)), 2)
    served = saturated_service(50, 20, 100, 20, 20, 1000)
    for t, w in enumerate(served):
        assert w >= s(F(t, 10)) * 10


def test_leftover_delay_covers_brute_force_mean_delay():
    s = leftover_service(S(1, 0), A(2, F(2, 5)), 2)
    bound = delay_bound(A(2, F(2, 5)), s)
    assert bound == 10
    worst = 0
    for ph in range(50):
        pk = periodic(0, 50, 40, 3, 20) + periodic(ph, 50, 40, 2, 20) + periodic(ph, 50, 40, 1, 20)
        d = priority_link(pk, 3000)
        worst = max(worst, max(x for x in d[40:80] if x is not None))
    assert worst <= bound * 10


# concatenation

def test_concatenate_examples():
    assert concatenate(S(2, 1), S(3, 2)) == S(2, 3)
    s = S(F(3, 5), F(20, 3))
    assert concatenate(s, S(math.inf, 0)) == s
    assert concatenate(S(1, 0), S(1, 0)) == S(1, 0)


@given(pos, fracs, pos, fracs, pos, fracs)
def test_concatenate_associative(r1, l1, r2, l2, r3, l3):
    a, b, c = S(r1, l1), S(r2, l2), S(r3, l3)
    assert concatenate(concatenate(a, b), c) == concatenate(a, concatenate(b, c))
    assert concatenate(a, b).latency == l1 + l2


# per-switch bounds

def test_single_high_flow_bound_two():
    [r] = switch_bounds(SwitchConfig(output_service=2 * TU), [flow("h", 3)], TimeBase())
    assert r.bound.bound == 2 and r.bound.bound_ticks == 2 * TU


def test_high_plus_low_bound_four():
    rs = switch_bounds(SwitchConfig(output_service=2 * TU), [flow("h", 3), flow("l", 1)], TimeBase())
    assert rs[1].bound.bound == F(20, 3) and rs[1].bound.bound_ticks == 6667
    assert rs[0].bound.bound == 4
    assert rs[0].service == S(1, 2)


def test_overload_is_unstable_per_class():
    fs = [flow("h", 3, tx=2, period=1), flow("m", 2, period=50), flow("l", 1, period=50, port=1)]
    rs = {r.flow_id: r for r in switch_bounds(SwitchConfig(output_service=2 * TU), fs, TimeBase())}
    assert rs["h"].bound is None and rs["h"].unstable
    assert rs["m"].bound is None
    assert rs["l"].bound is not None


def _phase_sweep(flows_ticks, horizon):
    """Max delay of the first list entry's frames over every relative phase and both tie orders."""
    worst = 0
    (p0, lvl0, tx0), (p1, lvl1, tx1) = flows_ticks
    for off in range(p0):
        for first in (True, False):
            a = periodic(0, p0, horizon // p0, lvl0, tx0)
            b = periodic(off, p1, horizon // p1, lvl1, tx1)
            d = priority_link(a + b if first else b + a, horizon * 2)
            mine = d[:len(a)] if first else d[len(b):]
            worst = max(worst, max(x for x in mine if x is not None))
    return worst


def test_single_flow_phase_sweep_oracle():
    worst = 0
    for off in range(50):
        d = priority_link(periodic(off, 50, 20, 3, 20), 2000)
        worst = max(worst, max(x for x in d if x is not None))
    assert worst == 20  # 2 T.U at 10 ticks per T.U
    [r] = switch_bounds(SwitchConfig(output_service=20), [FlowSpec("h", 50, 3, 0, 0, 20)], TimeBase(10))
    assert r.bound.bound_ticks == worst


def test_high_low_phase_sweep_oracle():
    worst = _phase_sweep([(50, 3, 20), (50, 1, 20)], 1000)
    assert worst == 40
    rs = switch_bounds(SwitchConfig(output_service=20),
                       [FlowSpec("h", 50, 3, 0, 0, 20), FlowSpec("l", 50, 1, 0, 0, 20)], TimeBase(10))
    assert rs[0].bound.bound_ticks == worst
