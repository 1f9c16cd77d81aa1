import math

import numpy as np
import pytest

from vlc_harvest import kernels
from vlc_harvest.kernels import McCoefficients, python_backend
from vlc_harvest.link_budget import BlockAllocation, RfFading, harvest_phase2, rf_rate, rf_snr_per_watt
from vlc_harvest.optimizer import LinkContext, bias_grid, time_grid
from vlc_harvest.scenario import Geometry, SystemParams

P = SystemParams()
CTX = LinkContext.build(Geometry(), P)
needs_compiled = pytest.mark.skipif(kernels.compiled_backend is None,
                                    reason="compiled extension not built")


def _grid_inputs(step=5e-3):
    ib = bias_grid(P, step)
    return (np.asarray(CTX.r_vlc(ib, 1.0), float), np.asarray(CTX.e1(ib, 1.0), float),
            float(harvest_phase2(1.0, CTX.h_vlc, P)), time_grid(step))


def _coefficients():
    alloc = BlockAllocation(0.8, 0.2, 0.8)
    ep = P.eta * P.p_led
    return McCoefficients(
        snr_coef=CTX.alpha / CTX.h_vlc**2 * alloc.a_peak**2, rate_vlc=alloc.t_vlc * P.b_vlc,
        e1_scale=0.75 * alloc.t_vlc * P.v_t, k1=ep * alloc.i_b,
        e2_scale=0.75 * alloc.t_rf * P.v_t, k2=ep * P.i_max, i0=P.i_dark, t_rf=alloc.t_rf,
        b_rf=P.b_rf, zeta=CTX.zeta)


def test_scan_matches_direct_evaluation():
    vlc, e1, e2, t = _grid_inputs()
    i, j, val, ok = kernels.scan_min_rate(vlc, e1, e2, t, CTX.zeta, P.b_rf, P.r_th)
    ib = bias_grid(P, 5e-3)
    phi = np.asarray(CTX.phi(ib[:, None], t[None, :], None))
    assert ok
    assert val == pytest.approx(phi.max(), rel=1e-12)
    assert phi[i, j] == pytest.approx(val, rel=1e-12)


def test_scan_reports_infeasible_best():
    vlc, e1, e2, t = _grid_inputs(0.05)
    _, _, val, ok = kernels.scan_min_rate(vlc, e1, e2, t, CTX.zeta, P.b_rf, 1e12)
    assert not ok and val > 0


def test_scan_tie_goes_to_first_point():
    t = np.array([0.25, 0.5])
    i, j, _, _ = python_backend.scan_min_rate(np.zeros(3), np.zeros(3), 0.0, t, 1.0, 1.0, 0.0)
    assert (i, j) == (0, 0)


def test_moments_match_direct_formulas():
    h = np.linspace(5e-6, 8e-6, 1001)
    c = _coefficients()
    assert c.zeta == float(rf_snr_per_watt(4.0, RfFading(), P))
    sums = kernels.mc_moments(h, c, (0.0, 0.0, 0.0))
    r_v = c.rate_vlc * np.log2(1 + c.snr_coef * h**2)
    e = c.e1_scale * c.k1 * h * np.log1p(c.k1 * h / c.i0) \
        + c.e2_scale * c.k2 * h * np.log1p(c.k2 * h / c.i0)
    r_r = rf_rate(c.t_rf, e, RfFading(), 4.0, P)
    np.testing.assert_allclose(sums[0::2], [r_v.sum(), e.sum(), np.sum(r_r)], rtol=1e-11)
    np.testing.assert_allclose(sums[1::2], [np.sum(r_v**2), np.sum(e**2), np.sum(r_r**2)],
                               rtol=1e-11)


@needs_compiled
def test_backends_agree_on_scan():
    vlc, e1, e2, t = _grid_inputs(1e-3)
    for r_th in (P.r_th, 1e12):
        a = python_backend.scan_min_rate(vlc, e1, e2, t, CTX.zeta, P.b_rf, r_th)
        b = kernels.compiled_backend.scan_min_rate(vlc, e1, e2, t, CTX.zeta, P.b_rf, r_th)
        assert a[0] == b[0] and a[1] == b[1] and a[3] == b[3]
        assert a[2] == pytest.approx(b[2], rel=1e-13)


@needs_compiled
def test_backends_agree_on_moments():
    rng = np.random.default_rng(2)
    h = rng.uniform(5e-6, 8e-6, 100_000)
    args = (h,) + tuple(vars(_coefficients()).values()) + (4e7, 7e-7, 1.2e7)
    a = python_backend.mc_moments(*args)
    b = kernels.compiled_backend.mc_moments(*args)
    np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-30)
    assert math.isfinite(sum(a))
