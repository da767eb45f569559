import math

import pytest
from hypothesis import given, strategies as st

from wsnbroadcast.analytic import NetworkParams
from wsnbroadcast.errors import DomainError
from wsnbroadcast.geometry import (
    area_breakdown, fraction_to_cs_radius, hidden_count, hidden_count_for_fraction,
)


def test_no_extra_sensing_gives_worst_case():
    a = area_breakdown(1.0, 1.0)
    assert a.a_ph == pytest.approx(3 * math.pi, abs=1e-15)
    assert a.hidden_fraction == 1.0
    assert a.a_cs == 0.0


def test_full_sensing_leaves_no_hidden_area():
    a = area_breakdown(1.0, 2.0)
    assert a.a_ph == 0.0 and a.hidden_fraction == 0.0


def test_half_hidden_area():
    a = area_breakdown(1.0, math.sqrt(2.5))
    assert a.hidden_fraction == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("cs", [0.99, 2.01, -1.0])
def test_cs_radius_out_of_range(cs):
    with pytest.raises(DomainError):
        area_breakdown(1.0, cs)


def test_hidden_count_examples():
    params = NetworkParams(lam=10 / math.pi, radius=1.0)
    assert hidden_count(params, 0.0) == 0.0
    assert hidden_count(params, 3 * math.pi) == pytest.approx(3 * params.n_mean, rel=1e-15)
    assert hidden_count(params, 1.5 * math.pi) == pytest.approx(15.0, rel=1e-15)


def test_hidden_count_bounds():
    params = NetworkParams(lam=1.0, radius=1.0)
    with pytest.raises(DomainError):
        hidden_count(params, 3 * math.pi * 1.01)
    with pytest.raises(DomainError):
        hidden_count(params, -0.1)


def test_fraction_inverse_examples():
    assert fraction_to_cs_radius(2.0, 1.0) == 2.0
    assert fraction_to_cs_radius(2.0, 0.0) == 4.0
    assert fraction_to_cs_radius(1.0, 0.5) == pytest.approx(math.sqrt(2.5), abs=1e-15)
    with pytest.raises(DomainError):
        fraction_to_cs_radius(1.0, 1.1)


def test_hidden_count_for_fraction():
    params = NetworkParams.from_mean_neighbors(10)
    assert hidden_count_for_fraction(params, 1.0) == pytest.approx(30.0, rel=1e-14)
    assert hidden_count_for_fraction(params, 0.0) == 0.0


@given(r=st.floats(0.01, 100), f=st.floats(0, 1))
def test_round_trip_and_conservation(r, f):
    a = area_breakdown(r, fraction_to_cs_radius(r, f))
    assert a.hidden_fraction == pytest.approx(f, abs=1e-12)
    assert a.a_tx + a.a_cs + a.a_ph == pytest.approx(4 * math.pi * r * r, rel=1e-12)


@given(r=st.floats(0.1, 10), u=st.floats(0, 1), v=st.floats(0, 1))
def test_hidden_area_decreasing_in_cs_radius(r, u, v):
    lo, hi = sorted((u, v))
    if hi - lo < 1e-9:
        return
    assert area_breakdown(r, r * (1 + hi)).a_ph < area_breakdown(r, r * (1 + lo)).a_ph
