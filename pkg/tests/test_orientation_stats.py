import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from vlc_harvest.link_budget import BlockAllocation, RfFading, harvest_phase1, harvest_phase2, vlc_rate
from vlc_harvest.orientation_stats import (
    avg_harvest_closed_form, avg_harvest_quadrature, avg_rf_rate_bound, avg_rf_rate_quadrature,
    avg_vlc_rate_closed_form, avg_vlc_rate_quadrature, closed_form_terms, f1, f2, f3, f4,
    monte_carlo_moments, monte_carlo_report,
)
from vlc_harvest.scenario import Geometry, OrientationModel, SystemParams

P = SystemParams()
H0 = 7.957747154594766788e-06
ALLOC = BlockAllocation(0.8, 0.2, 0.8)
DEG = math.radians

# 40-digit references from an independent high-precision integration
AVG_VLC_0_10_EXACT = 43354374.63819434
AVG_VLC_0_10_CLOSED = 43351388.30894511
AVG_VLC_10_40_EXACT = 40944259.33006753
AVG_VLC_10_40_CLOSED = 40112886.78348123
AVG_E_LN_0_10 = 7.929800777963043e-07


def _fd(func, x, h):
    return (func(x + h) - func(x - h)) / (2 * h)


@settings(max_examples=50, deadline=None)
@given(x=st.floats(0.05, 0.95), l2=st.floats(0.5, 1e3))
def test_f1_f2_derivatives(x, l2):
    h = 1e-6
    d1 = _fd(lambda u: f1(u, l2), x, h)
    d2 = _fd(lambda u: f2(u, l2), x, h)
    ref1 = math.log1p(l2 * x) / (2 * math.sqrt(1 - x))
    ref2 = math.sqrt(1 - x) * math.log1p(l2 * x) / 4
    assert d1 == pytest.approx(ref1, rel=1e-5, abs=1e-7)
    assert d2 == pytest.approx(ref2, rel=1e-5, abs=1e-7)


@settings(max_examples=50, deadline=None)
@given(frac=st.floats(0.05, 0.95), h_c=st.floats(1e-6, 1e-5))
def test_f3_f4_derivatives(frac, h_c):
    x = frac * h_c
    h = 1e-6 * h_c
    d3 = _fd(lambda u: f3(u, h_c), x, h)
    d4 = _fd(lambda u: f4(u, h_c), x, h)
    root = math.sqrt(1 - (x / h_c) ** 2)
    assert d3 == pytest.approx(x / root, rel=1e-5)
    assert d4 == pytest.approx(x * math.log(x) / root, rel=1e-5)


@pytest.mark.parametrize("l2", [1.0, 42.2, 500.0])
def test_f1_f2_differences_match_quadrature(l2):
    lo, hi = math.cos(DEG(40)) ** 2, math.cos(DEG(10)) ** 2
    q1 = integrate.quad(lambda t: math.log1p(l2 * t) / (2 * math.sqrt(1 - t)), lo, hi,
                        epsabs=1e-13, epsrel=1e-12)[0]
    q2 = integrate.quad(lambda t: math.sqrt(1 - t) * math.log1p(l2 * t) / 4, lo, hi,
                        epsabs=1e-13, epsrel=1e-12)[0]
    assert f1(hi, l2) - f1(lo, l2) == pytest.approx(q1, abs=1e-8)
    assert f2(hi, l2) - f2(lo, l2) == pytest.approx(q2, abs=1e-8)


def test_antiderivative_domain():
    with pytest.raises(ValueError):
        f1(0.0, 1.0)
    with pytest.raises(ValueError):
        f4(0.0, 1.0)


def test_averaged_rate_references():
    m = OrientationModel(0.0, DEG(10))
    assert avg_vlc_rate_quadrature(ALLOC, m, H0, P) == pytest.approx(AVG_VLC_0_10_EXACT, rel=1e-9)
    assert avg_vlc_rate_closed_form(ALLOC, m, H0, P) == pytest.approx(AVG_VLC_0_10_CLOSED,
                                                                      rel=1e-9)
    m = OrientationModel(DEG(10), DEG(40))
    assert avg_vlc_rate_quadrature(ALLOC, m, H0, P) == pytest.approx(AVG_VLC_10_40_EXACT,
                                                                     rel=1e-9)
    assert avg_vlc_rate_closed_form(ALLOC, m, H0, P) == pytest.approx(AVG_VLC_10_40_CLOSED,
                                                                      rel=1e-9)


def test_averaged_energy_reference():
    m = OrientationModel(0.0, DEG(10))
    assert avg_harvest_closed_form(ALLOC, m, H0, P) == pytest.approx(AVG_E_LN_0_10, rel=1e-9)


def test_closed_form_is_lower_bound_on_random_configurations():
    rng = np.random.default_rng(11)
    for _ in range(200):
        t1 = rng.uniform(0, DEG(60))
        t2 = min(t1 + rng.uniform(DEG(1), DEG(40)), DEG(85))
        model = OrientationModel(t1, t2)
        i_b = rng.uniform(0.15, 0.95)
        alloc = BlockAllocation(i_b, min(i_b - 0.1, 1 - i_b), rng.uniform(0.05, 0.95))
        h_c = rng.uniform(1e-6, 1e-5)
        bound = avg_vlc_rate_closed_form(alloc, model, h_c, P)
        exact = avg_vlc_rate_quadrature(alloc, model, h_c, P)
        assert bound <= exact + 1e-9


def test_energy_closed_form_matches_log_integrand():
    model = OrientationModel(DEG(10), DEG(40))
    t = closed_form_terms(ALLOC, model, H0, P)
    scale = model.c_theta / model.spread

    def ln_form(th):
        h = H0 * math.cos(th)
        return t.m1 * h * math.log(t.m2 * h) + t.m3 * h * math.log(t.m4 * h)

    ref = scale * integrate.quad(ln_form, model.theta1, model.theta2, epsabs=1e-20,
                                 epsrel=1e-12)[0]
    assert avg_harvest_closed_form(ALLOC, model, H0, P) == pytest.approx(ref, rel=1e-6)
    # ln(x) versus ln(1 + x) is invisible at these photocurrents
    exact = avg_harvest_quadrature(ALLOC, model, H0, P)
    assert avg_harvest_closed_form(ALLOC, model, H0, P) == pytest.approx(exact, rel=1e-5)


def test_energy_modes():
    model = OrientationModel(0.0, DEG(10))
    with_e2 = avg_harvest_closed_form(ALLOC, model, H0, P, "carryover")
    without = avg_harvest_closed_form(ALLOC, model, H0, P, "none")
    assert with_e2 > without
    with pytest.raises(ValueError):
        avg_harvest_closed_form(ALLOC, model, H0, P, "sometimes")


def test_shrinking_spread_recovers_deterministic_values():
    theta = DEG(20)
    model = OrientationModel(theta, theta + 1e-6)
    h = H0 * math.cos(theta)
    assert avg_vlc_rate_quadrature(ALLOC, model, H0, P) == pytest.approx(
        vlc_rate(ALLOC, h, P), rel=1e-6)
    e_ref = harvest_phase1(ALLOC, h, P) + harvest_phase2(ALLOC.t_rf, h, P)
    assert avg_harvest_quadrature(ALLOC, model, H0, P) == pytest.approx(e_ref, rel=1e-6)
    assert avg_rf_rate_quadrature(ALLOC, model, H0, 4.0, P) == pytest.approx(
        float(avg_rf_rate_bound(ALLOC.t_rf, e_ref, 4.0, RfFading(), P)), rel=1e-6)


def test_wider_tilt_lowers_averages():
    vals = [avg_vlc_rate_quadrature(ALLOC, OrientationModel(0.0, DEG(t)), H0, P)
            for t in (10, 20, 30, 40, 50)]
    assert np.all(np.diff(vals) < 0)
    energies = [avg_harvest_closed_form(ALLOC, OrientationModel(0.0, DEG(t)), H0, P)
                for t in (10, 20, 30, 40, 50)]
    assert np.all(np.diff(energies) < 0)


def test_rf_plugin_value_is_upper_bound_on_average():
    model = OrientationModel(DEG(10), DEG(40))
    e = avg_harvest_quadrature(ALLOC, model, H0, P)
    plug = float(avg_rf_rate_bound(ALLOC.t_rf, e, 4.0, RfFading(), P))
    assert plug >= avg_rf_rate_quadrature(ALLOC, model, H0, 4.0, P)


def test_monte_carlo_is_deterministic_and_consistent():
    geom = Geometry()
    model = OrientationModel(DEG(10), DEG(40))
    a = monte_carlo_moments(ALLOC, model, geom, P, 100_000, seed=5)
    b = monte_carlo_moments(ALLOC, model, geom, P, 100_000, seed=5)
    assert a == b
    rep = monte_carlo_report(ALLOC, model, geom, P, 100_000, seed=5)
    assert abs(rep.mc_r_vlc.mean - rep.avg_r_vlc_exact) < 3 * rep.mc_r_vlc.stderr
    assert abs(rep.mc_eh.mean - rep.avg_eh_exact) < 3 * rep.mc_eh.stderr
    assert abs(rep.mc_r_rf.mean - rep.avg_r_rf_exact) < 3 * rep.mc_r_rf.stderr


def test_monte_carlo_error_shrinks_with_samples():
    geom = Geometry()
    model = OrientationModel(DEG(10), DEG(40))
    small = monte_carlo_moments(ALLOC, model, geom, P, 10_000, seed=1)[0].stderr
    large = monte_carlo_moments(ALLOC, model, geom, P, 1_000_000, seed=1)[0].stderr
    assert large / small == pytest.approx(0.1, rel=0.05)
