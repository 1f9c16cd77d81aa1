"""Link performance averaged over a uniformly tilted relay photodiode.

Three routes are provided for each average:

* exact integrals evaluated by adaptive quadrature,
* closed-form approximations built from the antiderivatives ``f1`` to ``f4``,
* Monte Carlo over sampled tilt angles.

The closed-form optical rate truncates the arcsine weight
``1/sqrt(4t(1-t))`` to its first two terms around ``t = 1``. Every dropped
term is positive, so the closed form never exceeds the exact average. The
closed-form energy replaces ``ln(1 + x)`` by ``ln(x)``, which is tight because
the photocurrent exceeds the dark current by several orders of magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from ._quadrature import adaptive_quad, arcsine_weighted_integral
from .link_budget import (
    FILL_FACTOR, OPTICAL_SNR_FACTOR, UNIT_FADING, BlockAllocation, RfFading,
    harvest_phase1_values, rf_rate, rf_snr_per_watt, vlc_rate_values,
)
from .scenario import Geometry, OrientationModel, SystemParams, lambertian_order, shot_noise_power
from .vlc_channel import deterministic_gain, sample_orientation, vlc_gain

LN2 = math.log(2.0)
E2_MODES = ("carryover", "none")


@dataclass(frozen=True)
class ClosedFormTerms:
    """Coefficients of the closed-form averages.

    Attributes
    ----------
    l1 : float
        Rate scale ``c_theta t_vlc B_vlc / (theta2 - theta1)`` (bit/s).
    l2 : float
        Optical SNR at normal incidence.
    m1, m3 : float
        Energy scales of the optical and RF phases (J).
    m2, m4 : float
        DC photocurrent per unit gain over the dark current, for the two phases.
    """

    l1: float
    l2: float
    m1: float
    m2: float
    m3: float
    m4: float


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo mean with its standard error."""

    mean: float
    stderr: float


@dataclass(frozen=True)
class AveragedReport:
    """Orientation-averaged quantities from the three evaluation routes."""

    avg_r_vlc_exact: float
    avg_r_vlc_bound: float
    avg_eh_exact: float
    avg_eh_closed: float
    avg_r_rf_bound: float
    avg_r_rf_exact: float
    mc_r_vlc: Estimate
    mc_eh: Estimate
    mc_r_rf: Estimate
    n_samples: int


def _check_mode(e2_mode):
    if e2_mode not in E2_MODES:
        raise ValueError(f"e2_mode must be one of {E2_MODES}, got {e2_mode!r}")


def closed_form_terms(alloc: BlockAllocation, model: OrientationModel, h_c: float,
                      params: SystemParams) -> ClosedFormTerms:
    """Collect the closed-form coefficients for one allocation."""
    ep = params.eta * params.p_led
    return ClosedFormTerms(
        l1=model.c_theta * alloc.t_vlc * params.b_vlc / model.spread,
        l2=OPTICAL_SNR_FACTOR * (ep * alloc.a_peak * h_c) ** 2 / shot_noise_power(params),
        m1=FILL_FACTOR * alloc.t_vlc * ep * alloc.i_b * params.v_t,
        m2=ep * alloc.i_b / params.i_dark,
        m3=FILL_FACTOR * alloc.t_rf * ep * params.i_max * params.v_t,
        m4=ep * params.i_max / params.i_dark,
    )


# --------------------------------------------------------------------------
# Antiderivatives (natural logarithm)


def f1(x, l2):
    """Antiderivative of ``ln(1 + l2 x) / (2 sqrt(1 - x))``.

    Parameters
    ----------
    x : float or ndarray
        Squared tilt cosine in (0, 1].
    l2 : float or ndarray
        Positive SNR coefficient.
    """
    x, l2 = np.asarray(x, float), np.asarray(l2, float)
    if np.any(x <= 0):
        raise ValueError("f1 requires x > 0")
    w = np.sqrt(np.clip(1.0 - x, 0.0, None))
    a = np.sqrt((l2 + 1.0) / l2)
    out = -w * np.log1p(l2 * x) + 2.0 * w - 2.0 * a * np.arctanh(w / a)
    return out if out.ndim else float(out)


def f2(x, l2):
    """Antiderivative of ``sqrt(1 - x) ln(1 + l2 x) / 4``."""
    x, l2 = np.asarray(x, float), np.asarray(l2, float)
    if np.any(x <= 0):
        raise ValueError("f2 requires x > 0")
    w = np.sqrt(np.clip(1.0 - x, 0.0, None))
    a2 = (l2 + 1.0) / l2
    a = np.sqrt(a2)
    w3 = w**3
    out = (-w3 / 6.0 * np.log1p(l2 * x) + w3 / 9.0 + a2 * w / 3.0
           - a2 * a / 3.0 * np.arctanh(w / a))
    return out if out.ndim else float(out)


def f3(x, h_c):
    """Antiderivative of ``x / sqrt(1 - (x/h_c)**2)``."""
    x = np.asarray(x, float)
    out = -h_c * np.sqrt(np.clip(h_c * h_c - x * x, 0.0, None))
    return out if out.ndim else float(out)


def f4(x, h_c):
    """Antiderivative of ``x ln(x) / sqrt(1 - (x/h_c)**2)``."""
    x = np.asarray(x, float)
    if np.any(x <= 0):
        raise ValueError("f4 requires x > 0")
    s = np.sqrt(np.clip(h_c * h_c - x * x, 0.0, None))
    out = -h_c * (h_c * np.arctanh(s / h_c) + s * (np.log(x) - 1.0))
    return out if out.ndim else float(out)


def _arcsine_kernel_integral(l2, model: OrientationModel):
    """Closed-form value of the truncated integral of ``ln(1 + l2 t)``.

    Integration runs over ``t`` in ``[cos(theta2)**2, cos(theta1)**2]``.
    """
    hi = math.cos(model.theta1) ** 2
    lo = math.cos(model.theta2) ** 2
    if lo <= 0:
        raise ValueError("closed forms need theta2 < pi/2")
    l2 = np.asarray(l2, float)
    safe = np.where(l2 > 0, l2, 1.0)
    val = (np.asarray(f1(hi, safe)) + np.asarray(f2(hi, safe))
           - np.asarray(f1(lo, safe)) - np.asarray(f2(lo, safe)))
    return np.where(l2 > 0, val, 0.0)


def vlc_rate_bound_values(a_peak, t_vlc, model: OrientationModel, h_c: float,
                          params: SystemParams):
    """Array version of :func:`avg_vlc_rate_closed_form`."""
    l2 = (OPTICAL_SNR_FACTOR * (params.eta * params.p_led * np.asarray(a_peak, float) * h_c) ** 2
          / shot_noise_power(params))
    l1 = model.c_theta * np.asarray(t_vlc, float) * params.b_vlc / model.spread
    out = l1 * _arcsine_kernel_integral(l2, model) / LN2
    return out if np.ndim(out) else float(out)


def avg_vlc_rate_closed_form(alloc: BlockAllocation, model: OrientationModel, h_c: float,
                             params: SystemParams) -> float:
    """Closed-form lower bound on the tilt-averaged optical rate (bit/s)."""
    return float(vlc_rate_bound_values(alloc.a_peak, alloc.t_vlc, model, h_c, params))


def avg_vlc_rate_quadrature(alloc: BlockAllocation, model: OrientationModel, h_c: float,
                            params: SystemParams) -> float:
    """Tilt-averaged optical rate by adaptive quadrature (bit/s)."""
    terms = closed_form_terms(alloc, model, h_c, params)
    if terms.l2 == 0:
        return 0.0
    integral = arcsine_weighted_integral(
        lambda t: math.log1p(terms.l2 * t),
        math.pi / 2 - model.theta2, math.pi / 2 - model.theta1,
    )
    return terms.l1 * integral / LN2


def _energy_shape_integrals(model: OrientationModel, h_c: float):
    """Differences of ``f3`` and ``f4`` across the gain support."""
    hi = h_c * math.cos(model.theta1)
    lo = h_c * math.cos(model.theta2)
    if lo <= 0:
        raise ValueError("closed forms need cos(theta2) > 0")
    d3 = float(f3(hi, h_c)) - float(f3(lo, h_c))
    d4 = float(f4(hi, h_c)) - float(f4(lo, h_c))
    return d3, d4


def harvest_closed_values(i_b, t_vlc, t_rf, model: OrientationModel, h_c: float,
                          params: SystemParams, e2_mode: str = "carryover"):
    """Array version of :func:`avg_harvest_closed_form`."""
    _check_mode(e2_mode)
    d3, d4 = _energy_shape_integrals(model, h_c)
    scale = model.c_theta / (h_c * model.spread)
    ep = params.eta * params.p_led
    i_b = np.asarray(i_b, float)
    m1 = FILL_FACTOR * np.asarray(t_vlc, float) * ep * i_b * params.v_t
    m2 = ep * i_b / params.i_dark
    out = scale * m1 * (np.log(m2) * d3 + d4)
    if e2_mode == "carryover":
        m3 = FILL_FACTOR * np.asarray(t_rf, float) * ep * params.i_max * params.v_t
        m4 = ep * params.i_max / params.i_dark
        out = out + scale * m3 * (math.log(m4) * d3 + d4)
    return out if np.ndim(out) else float(out)


def avg_harvest_closed_form(alloc: BlockAllocation, model: OrientationModel, h_c: float,
                            params: SystemParams, e2_mode: str = "carryover") -> float:
    """Closed-form tilt-averaged harvested energy (J).

    With ``e2_mode="carryover"`` the RF-phase harvest of a previous block with
    the same allocation is included; ``"none"`` drops it.
    """
    return float(harvest_closed_values(alloc.i_b, alloc.t_vlc, alloc.t_rf, model, h_c,
                                       params, e2_mode))


def _exact_energy(h, alloc, params, e2_mode):
    e = harvest_phase1_values(alloc.i_b, alloc.t_vlc, h, params)
    if e2_mode == "carryover":
        e = e + harvest_phase1_values(params.i_max, alloc.t_rf, h, params)
    return e


def avg_harvest_quadrature(alloc: BlockAllocation, model: OrientationModel, h_c: float,
                           params: SystemParams, e2_mode: str = "carryover") -> float:
    """Tilt-averaged harvested energy of the exact diode law, by quadrature (J)."""
    _check_mode(e2_mode)
    return model.c_theta / model.spread * adaptive_quad(
        lambda th: _exact_energy(h_c * math.cos(th), alloc, params, e2_mode),
        model.theta1, model.theta2,
    )


def avg_rf_rate_quadrature(alloc: BlockAllocation, model: OrientationModel, h_c: float,
                           d_u: float, params: SystemParams, e2_mode: str = "carryover",
                           fading: RfFading = UNIT_FADING) -> float:
    """Tilt-averaged RF rate with per-orientation energy, by quadrature (bit/s)."""
    _check_mode(e2_mode)
    return model.c_theta / model.spread * adaptive_quad(
        lambda th: rf_rate(alloc.t_rf, _exact_energy(h_c * math.cos(th), alloc, params, e2_mode),
                           fading, d_u, params),
        model.theta1, model.theta2,
    )


def avg_rf_rate_bound(t_rf, avg_eh, d_u, fading: RfFading, params: SystemParams):
    """RF rate evaluated at the average harvested energy (bit/s).

    Because the rate is concave in energy this plug-in value is at least the
    true average rate, with equality for a deterministic orientation.
    """
    if np.any(np.asarray(avg_eh) < 0):
        raise ValueError("avg_eh >= 0 violated")
    return rf_rate(t_rf, avg_eh, fading, d_u, params)


# --------------------------------------------------------------------------
# Monte Carlo

MC_CHUNKS = 16


def _moments(total, total_sq, shift, n):
    mean = shift + total / n
    var = max(total_sq - total * total / n, 0.0) / (n - 1)
    return Estimate(float(mean), float(math.sqrt(var / n)))


def monte_carlo_moments(alloc: BlockAllocation, model: OrientationModel, geom: Geometry,
                        params: SystemParams, n_samples: int, seed: int,
                        e2_mode: str = "carryover", fading: RfFading = UNIT_FADING):
    """Sample-mean optical rate, energy and RF rate with standard errors.

    The sample count is split across a fixed number of independent streams
    spawned from ``seed``; chunk results are combined in stream order, so the
    output does not depend on how many workers evaluate the chunks.
    """
    _check_mode(e2_mode)
    if n_samples < 2:
        raise ValueError("n_samples >= 2 violated")
    m = lambertian_order(geom.theta_hpbw)
    ep = params.eta * params.p_led
    # shifting by the value at the mid angle keeps the variance sums well conditioned
    th_mid = 0.5 * (model.theta1 + model.theta2)
    h_mid = float(vlc_gain(geom, m, th_mid).h_vlc)
    e_mid = float(_exact_energy(h_mid, alloc, params, e2_mode))
    shift = np.array([
        vlc_rate_values(alloc.a_peak, alloc.t_vlc, h_mid, params),
        e_mid,
        rf_rate(alloc.t_rf, e_mid, fading, geom.d_u, params),
    ])
    coeffs = kernels.McCoefficients(
        snr_coef=OPTICAL_SNR_FACTOR * (ep * alloc.a_peak) ** 2 / shot_noise_power(params),
        rate_vlc=alloc.t_vlc * params.b_vlc,
        e1_scale=FILL_FACTOR * alloc.t_vlc * params.v_t,
        k1=ep * alloc.i_b,
        e2_scale=FILL_FACTOR * alloc.t_rf * params.v_t if e2_mode == "carryover" else 0.0,
        k2=ep * params.i_max,
        i0=params.i_dark,
        t_rf=alloc.t_rf,
        b_rf=params.b_rf,
        zeta=float(rf_snr_per_watt(geom.d_u, fading, params)),
    )
    streams = np.random.SeedSequence(seed).spawn(MC_CHUNKS)
    sizes = [n_samples // MC_CHUNKS + (1 if k < n_samples % MC_CHUNKS else 0)
             for k in range(MC_CHUNKS)]
    acc = np.zeros(6)
    for ss, size in zip(streams, sizes):
        if size == 0:
            continue
        theta = sample_orientation(model, np.random.default_rng(ss), size)
        h = np.ascontiguousarray(vlc_gain(geom, m, theta).h_vlc, dtype=float)
        acc += kernels.mc_moments(h, coeffs, shift)
    return tuple(_moments(acc[2 * k], acc[2 * k + 1], shift[k], n_samples) for k in range(3))


def monte_carlo_report(alloc: BlockAllocation, model: OrientationModel, geom: Geometry,
                       params: SystemParams, n_samples: int, seed: int,
                       e2_mode: str = "carryover",
                       fading: RfFading = UNIT_FADING) -> AveragedReport:
    """Monte Carlo estimates next to the quadrature and closed-form values."""
    m = lambertian_order(geom.theta_hpbw)
    h_c = deterministic_gain(geom, m)
    mc_v, mc_e, mc_r = monte_carlo_moments(alloc, model, geom, params, n_samples, seed,
                                           e2_mode, fading)
    eh_closed = avg_harvest_closed_form(alloc, model, h_c, params, e2_mode)
    return AveragedReport(
        avg_r_vlc_exact=avg_vlc_rate_quadrature(alloc, model, h_c, params),
        avg_r_vlc_bound=avg_vlc_rate_closed_form(alloc, model, h_c, params),
        avg_eh_exact=avg_harvest_quadrature(alloc, model, h_c, params, e2_mode),
        avg_eh_closed=eh_closed,
        avg_r_rf_bound=float(avg_rf_rate_bound(alloc.t_rf, eh_closed, geom.d_u, fading, params)),
        avg_r_rf_exact=avg_rf_rate_quadrature(alloc, model, h_c, geom.d_u, params, e2_mode,
                                              fading),
        mc_r_vlc=mc_v, mc_eh=mc_e, mc_r_rf=mc_r, n_samples=n_samples,
    )
