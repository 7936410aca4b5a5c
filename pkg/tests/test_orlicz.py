import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isslab.errors import DomainError, UnsupportedError
from isslab.orlicz import (
    YoungFunction,
    check_delta2,
    complementary,
    dual_norm_lower_bound,
    eval_young,
    holder_pair,
    legendre_transform,
    luxemburg_norm,
    small_interval_norm,
)
from isslab.signals import Interval, Signal, lp_norm, random_signal

ALL_KINDS = [
    YoungFunction.power(2),
    YoungFunction.power_over_p(3),
    YoungFunction.loglog(),
    YoungFunction.identity(),
]


# -- evaluation ------------------------------------------------------------


def test_eval_young_values():
    assert eval_young(YoungFunction.power(2), 3.0) == 9.0
    assert eval_young(YoungFunction.loglog(), 0.0) == 0.0
    assert eval_young(YoungFunction.power_over_p(2), 2.0) == 2.0
    with pytest.raises(DomainError):
        eval_young(YoungFunction.power(2), -1.0)


@pytest.mark.parametrize("phi", ALL_KINDS, ids=lambda p: p.kind)
def test_young_convex_and_increasing(phi):
    s = np.geomspace(1e-6, 1e6, 100)
    v = phi(s)
    assert v[0] >= 0
    assert np.all(np.diff(v) >= 0)
    # chord midpoint dominates the function value (convexity)
    mid = phi(0.5 * (s[:-1] + s[1:]))
    assert np.all(mid <= 0.5 * (v[:-1] + v[1:]) * (1 + 1e-12))


@pytest.mark.parametrize(
    "phi", [p for p in ALL_KINDS if p.kind != "identity"], ids=lambda p: p.kind
)
def test_young_growth_conditions(phi):
    small = np.geomspace(1e-12, 1e-6, 5)
    assert phi(small[0]) / small[0] <= phi(small[-1]) / small[-1] + 1e-9
    assert phi(1e-12) / 1e-12 < 0.1
    # the ratio Phi(s)/s keeps growing without bound (slowly for the
    # nearly-linear kind, so only a factor is asserted here)
    assert phi(1e6) / 1e6 > 5.0 * max(phi(1.0), 1e-12)
    assert phi(1e12) / 1e12 > phi(1e6) / 1e6


def test_serialization_roundtrip():
    tab = complementary(YoungFunction.loglog())
    back = YoungFunction.from_json(tab.to_json())
    s = np.geomspace(1e-5, tab.knots[-1, 0], 50)
    assert np.allclose(tab(s), back(s), rtol=0)
    p = YoungFunction.from_json(YoungFunction.power(2.5).to_json())
    assert p.p == 2.5


# -- complementary functions ----------------------------------------------


def test_complementary_closed_forms():
    assert complementary(YoungFunction.power_over_p(2)).p == 2.0
    assert complementary(YoungFunction.power_over_p(3)).p == pytest.approx(1.5)
    with pytest.raises(UnsupportedError):
        complementary(YoungFunction.identity())


def test_legendre_transform_matches_closed_form():
    phi = YoungFunction.power_over_p(3)
    conj = complementary(phi)
    for s in (0.5, 1.0, 2.0):
        exact = conj(s)
        assert legendre_transform(phi, s) == pytest.approx(exact, rel=1e-6)
    assert legendre_transform(phi, 0.0) == 0.0


def test_tabulated_conjugate_interpolation_accuracy():
    phi = YoungFunction.power_over_p(3)
    tab_knots = np.array([[s, legendre_transform(phi, s)] for s in np.geomspace(0.01, 10, 2000)])
    tab = YoungFunction.tabulated(tab_knots)
    s = np.array([0.5, 1.0, 2.0])
    exact = complementary(phi)(s)
    assert np.allclose(tab(s), exact, rtol=1e-5)


# -- Luxemburg norm --------------------------------------------------------


def test_luxemburg_basic_values():
    iv = Interval(0.0, 1.0)
    assert luxemburg_norm(YoungFunction.power(2), Signal.constant(2.0, iv)) == pytest.approx(2.0, rel=1e-10)
    assert luxemburg_norm(YoungFunction.loglog(), Signal.zero(iv)) == 0.0
    assert luxemburg_norm(
        YoungFunction.identity(), Signal.constant(1.0, Interval(0.0, 3.0))
    ) == pytest.approx(3.0)


@pytest.mark.parametrize("phi", ALL_KINDS, ids=lambda p: p.kind)
def test_luxemburg_homogeneity(phi):
    u = random_signal(4, 2, Interval(0.0, 2.0), 10, 1.0)
    base = luxemburg_norm(phi, u)
    for c in (0.125, 3.0, 40.0):
        scaled = Signal(u.grid, c * u.values)
        assert luxemburg_norm(phi, scaled) == pytest.approx(c * base, rel=1e-10)


@pytest.mark.parametrize("phi", ALL_KINDS, ids=lambda p: p.kind)
def test_luxemburg_interval_monotone(phi):
    u = random_signal(6, 1, Interval(0.0, 3.0), 12, 1.0)
    inner = luxemburg_norm(phi, u, Interval(0.5, 2.0))
    outer = luxemburg_norm(phi, u, Interval(0.0, 3.0))
    assert inner <= outer + 1e-12


@pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
def test_luxemburg_matches_lp(p):
    for seed in range(20):
        u = random_signal(seed, 2, Interval(0.0, 2.0), 8, 2.0)
        assert luxemburg_norm(YoungFunction.power(p), u) == pytest.approx(
            lp_norm(u, p), rel=1e-8
        )


@given(
    seed=st.integers(min_value=0, max_value=10_000),
    c=st.floats(min_value=0.01, max_value=100.0),
)
@settings(max_examples=30, deadline=None)
def test_luxemburg_homogeneity_property(seed, c):
    u = random_signal(seed, 1, Interval(0.0, 1.0), 6, 1.0)
    phi = YoungFunction.power_over_p(2)
    base = luxemburg_norm(phi, u)
    scaled = Signal(u.grid, c * u.values)
    assert luxemburg_norm(phi, scaled) == pytest.approx(c * base, rel=1e-9, abs=1e-12)


def test_small_interval_norm():
    u = Signal.constant(1.0, Interval(0.0, 1.0))
    assert small_interval_norm(YoungFunction.identity(), u, 0.0, 0.25) == pytest.approx(0.25)
    assert small_interval_norm(YoungFunction.power(2), u, 0.0, 0.01) == pytest.approx(0.1, rel=1e-9)
    # vanishes with the interval, and is monotone in delta
    deltas = [0.2, 0.1, 0.05, 0.01, 0.001]
    vals = [small_interval_norm(YoungFunction.loglog(), u, 0.3, d) for d in deltas]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 0.05


# -- dual lower bound and Hoelder -----------------------------------------


def test_dual_norm_lower_bound_sandwich():
    iv = Interval(0.0, 1.0)
    assert dual_norm_lower_bound(YoungFunction.power(2), Signal.zero(iv), iv) == 0.0
    for seed in range(10):
        u = random_signal(seed, 1, Interval(0.0, 1.0), 8, 1.0)
        lb = dual_norm_lower_bound(YoungFunction.power(2), u, iv, budget=6)
        lux = luxemburg_norm(YoungFunction.power(2), u)
        assert 0.0 <= lb <= 2.0 * lux * (1 + 1e-10)


def test_dual_norm_lower_bound_ramp():
    # matched candidate shape: the bound reaches at least half the norm
    grid = np.linspace(0.0, 1.0, 65)
    u = Signal(grid, (0.5 * (grid[:-1] + grid[1:])).reshape(-1, 1))
    iv = Interval(0.0, 1.0)
    phi = YoungFunction.power_over_p(2)
    lb = dual_norm_lower_bound(phi, u, iv, budget=4)
    assert lb >= 0.5 * luxemburg_norm(phi, u)


def test_holder_pair_values():
    iv = Interval(0.0, 1.0)
    phi = YoungFunction.power_over_p(2)
    zero = holder_pair(Signal.zero(iv), Signal.constant(1.0, iv), phi, iv)
    assert zero["lhs"] == 0.0 and zero["rhs"] == 0.0
    ones = holder_pair(Signal.constant(1.0, iv), Signal.constant(1.0, iv), phi, iv)
    # Luxemburg norms solve (1/k)^2/2 = 1, i.e. k = 1/sqrt(2), so the
    # right-hand side 2*k*k equals 1 and the pairing is an equality case
    assert ones["lhs"] == pytest.approx(1.0)
    assert ones["rhs"] == pytest.approx(1.0, rel=1e-9)
    assert ones["lhs"] <= ones["rhs"] + 1e-10


def test_holder_random_sweep():
    iv = Interval(0.0, 2.0)
    phi = YoungFunction.power_over_p(3)
    for seed in range(50):
        u = random_signal(seed, 1, iv, 7, 1.5)
        v = random_signal(seed + 500, 1, iv, 11, 1.5)
        hp = holder_pair(u, v, phi, iv)
        assert hp["lhs"] <= hp["rhs"] + 1e-10


# -- Delta_2 ---------------------------------------------------------------


def test_delta2_results(comp_loglog):
    r = check_delta2(YoungFunction.power(2), 1.0)
    assert r.satisfied and r.K == pytest.approx(4.0)
    for p in (1.5, 3.0, 4.0):
        rp = check_delta2(YoungFunction.power(p), 1.0)
        assert rp.satisfied and rp.K == pytest.approx(2.0**p)
    ri = check_delta2(YoungFunction.identity(), 1.0)
    assert ri.satisfied and ri.K == pytest.approx(2.0)
    assert check_delta2(YoungFunction.loglog(), 1.0).satisfied
    assert not check_delta2(comp_loglog, 1.0).satisfied
