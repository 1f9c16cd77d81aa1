"""Per-block link physics: rates, harvested energy and carryover between blocks.

Rates use base-2 logarithms and the diode harvesting law uses natural
logarithms. All functions broadcast over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from .scenario import Geometry, SystemParams, lambertian_order, rf_noise_power, shot_noise_power
from .vlc_channel import fixed_orientation_gain

# Electrical-to-information conversion factor of the optical channel
# capacity bound for a peak-limited signal.
OPTICAL_SNR_FACTOR = math.e / (2 * math.pi)

# Fraction of the diode output power delivered to the storage element.
FILL_FACTOR = 0.75


@dataclass(frozen=True)
class BlockAllocation:
    """Decision variables of one transmission block.

    Fields may also be numpy arrays to describe a batch of allocations.

    Attributes
    ----------
    i_b : float
        LED DC bias (A).
    a_peak : float
        Peak amplitude of the information signal (A).
    t_vlc, t_rf : float
        Fractions of the block spent on the optical and RF phases.
    """

    i_b: float
    a_peak: float
    t_vlc: float
    t_rf: float | None = None

    def __post_init__(self):
        if self.t_rf is None:
            object.__setattr__(self, "t_rf", 1.0 - self.t_vlc)
        t_vlc, t_rf = np.asarray(self.t_vlc), np.asarray(self.t_rf)
        if np.any(np.abs(t_vlc + t_rf - 1.0) > 1e-12):
            raise ValueError("t_vlc + t_rf = 1 violated")
        if not (np.all(t_vlc > 0) and np.all(t_rf > 0)):
            raise ValueError("t_vlc > 0 and t_rf > 0 violated")
        if np.any(np.asarray(self.a_peak) < 0):
            raise ValueError("a_peak >= 0 violated")

    def validate(self, params: SystemParams) -> "BlockAllocation":
        """Check the bias range and the clipping limit against ``params``."""
        tol = 1e-12
        i_b = np.asarray(self.i_b)
        if not np.all((params.i_min - tol <= i_b) & (i_b <= params.i_max + tol)):
            raise ValueError("i_min <= i_b <= i_max violated")
        if np.any(np.asarray(self.a_peak) > np.asarray(max_peak_amplitude(i_b, params)) + tol):
            raise ValueError("a_peak <= min(i_b - i_min, i_max - i_b) violated")
        return self

    @classmethod
    def at_bias(cls, i_b: float, t_vlc: float, params: SystemParams) -> "BlockAllocation":
        """Allocation that uses the full amplitude headroom at bias ``i_b``."""
        return cls(i_b, max_peak_amplitude(i_b, params), t_vlc)


@dataclass(frozen=True)
class LinkReport:
    """Rates and energies of one block."""

    r_vlc: float
    r_rf: float
    r_end2end: float
    e1: float
    e2: float
    e_h: float
    p_h: float
    snr_vlc: float
    snr_rf: float


@dataclass(frozen=True)
class RfFading:
    """Squared magnitude of the RF small-scale fading coefficient."""

    h_rf_sq: float = 1.0
    mode: str = "fixed_unit"

    def __post_init__(self):
        if self.h_rf_sq < 0:
            raise ValueError("h_rf_sq >= 0 violated")
        if self.mode not in ("fixed_unit", "rayleigh_sample"):
            raise ValueError(f"unknown fading mode {self.mode!r}")

    @classmethod
    def rayleigh(cls, rng) -> "RfFading":
        """Draw a unit-mean exponential power gain from ``rng``."""
        if not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(rng)
        return cls(float(rng.exponential(1.0)), "rayleigh_sample")


UNIT_FADING = RfFading()


def max_peak_amplitude(i_b, params: SystemParams):
    """Largest amplitude that keeps the LED current inside its linear range."""
    i_b_arr = np.asarray(i_b, dtype=float)
    if np.any(i_b_arr < params.i_min - 1e-12) or np.any(i_b_arr > params.i_max + 1e-12):
        raise ValueError(f"bias {i_b} outside [{params.i_min}, {params.i_max}]")
    out = np.maximum(np.minimum(i_b_arr - params.i_min, params.i_max - i_b_arr), 0.0)
    return out if out.ndim else float(out)


def _scalar(x):
    x = np.asarray(x, dtype=float)
    return x if x.ndim else float(x)


def vlc_snr(a_peak, h_vlc, params: SystemParams):
    """Signal-to-noise term inside the optical rate expression."""
    a_peak, h_vlc = np.asarray(a_peak, float), np.asarray(h_vlc, float)
    signal = (params.eta * params.p_led * a_peak * h_vlc) ** 2
    return _scalar(OPTICAL_SNR_FACTOR * signal / shot_noise_power(params))


def vlc_rate_values(a_peak, t_vlc, h_vlc, params: SystemParams):
    """Optical rate (bit/s) for array-valued amplitude, time and gain."""
    snr = np.asarray(vlc_snr(a_peak, h_vlc, params))
    return _scalar(np.asarray(t_vlc, float) * params.b_vlc * np.log2(1.0 + snr))


def vlc_rate(alloc: BlockAllocation, h_vlc, params: SystemParams):
    """Achievable rate of the optical hop for one block (bit/s)."""
    return vlc_rate_values(alloc.a_peak, alloc.t_vlc, h_vlc, params)


def diode_energy(duration, current_dc, params: SystemParams):
    """Energy a diode harvester delivers from DC photocurrent over ``duration``."""
    current_dc = np.asarray(current_dc, float)
    e = FILL_FACTOR * np.asarray(duration, float) * current_dc * params.v_t * np.log1p(
        current_dc / params.i_dark)
    return _scalar(e)


def harvest_phase1_values(i_b, t_vlc, h_vlc, params: SystemParams):
    """Energy harvested while receiving data, array version."""
    i_dc = params.eta * np.asarray(h_vlc, float) * params.p_led * np.asarray(i_b, float)
    return diode_energy(t_vlc, i_dc, params)


def harvest_phase1(alloc: BlockAllocation, h_vlc, params: SystemParams):
    """Energy harvested from the DC part of the light during the optical phase (J)."""
    return harvest_phase1_values(alloc.i_b, alloc.t_vlc, h_vlc, params)


def harvest_phase2(t_rf, h_vlc, params: SystemParams):
    """Energy harvested during the RF phase while the LED is driven at ``i_max`` (J)."""
    return harvest_phase1_values(params.i_max, t_rf, h_vlc, params)


def total_harvest(alloc_i: BlockAllocation, e2_prev, h_vlc, params: SystemParams):
    """Energy available for RF transmission in block ``i``.

    ``e2_prev`` is the RF-phase harvest of the previous block (zero for the
    first block or when carryover is disabled).
    """
    if np.any(np.asarray(e2_prev) < 0):
        raise ValueError("e2_prev >= 0 violated")
    return _scalar(np.asarray(harvest_phase1(alloc_i, h_vlc, params)) + e2_prev)


def rf_path_gain(d_u, params: SystemParams):
    """Large-scale RF attenuation (linear, > 1) at user distance ``d_u``."""
    d_u_arr = np.asarray(d_u, float)
    if np.any(d_u_arr < params.d_ref):
        raise ValueError(f"d_u must be at least d_ref = {params.d_ref} m")
    wavelength = SPEED_OF_LIGHT / params.f_c
    g = (4 * math.pi * params.d_ref / wavelength) ** 2 * (d_u_arr / params.d_ref) ** params.beta_pl
    return _scalar(g)


def rf_snr_per_watt(d_u, fading: RfFading, params: SystemParams):
    """Received SNR per watt of transmit power."""
    return _scalar(fading.h_rf_sq / (np.asarray(rf_path_gain(d_u, params)) * rf_noise_power(params)))


def rf_rate(t_rf, e_h, fading: RfFading, d_u, params: SystemParams):
    """Rate of the RF hop when the relay spends energy ``e_h`` over ``t_rf`` (bit/s)."""
    t_rf = np.asarray(t_rf, float)
    if np.any(t_rf <= 0):
        raise ValueError("t_rf > 0 violated")
    p_h = np.asarray(e_h, float) / t_rf
    snr = p_h * np.asarray(rf_snr_per_watt(d_u, fading, params))
    return _scalar(t_rf * params.b_rf * np.log2(1.0 + snr))


def end_to_end_rate(r_vlc, r_rf):
    """Decode-and-forward rate: the slower hop limits throughput."""
    return _scalar(np.minimum(r_vlc, r_rf))


def link_report(alloc: BlockAllocation, e2_prev, h_vlc, geom: Geometry, params: SystemParams,
                fading: RfFading = UNIT_FADING) -> LinkReport:
    """Evaluate every per-block quantity for a single allocation."""
    r_vlc = vlc_rate(alloc, h_vlc, params)
    e1 = harvest_phase1(alloc, h_vlc, params)
    e2 = harvest_phase2(alloc.t_rf, h_vlc, params)
    e_h = e1 + e2_prev
    r_rf = rf_rate(alloc.t_rf, e_h, fading, geom.d_u, params)
    p_h = e_h / alloc.t_rf
    return LinkReport(
        r_vlc=r_vlc, r_rf=r_rf, r_end2end=end_to_end_rate(r_vlc, r_rf),
        e1=e1, e2=e2, e_h=e_h, p_h=p_h,
        snr_vlc=vlc_snr(alloc.a_peak, h_vlc, params),
        snr_rf=p_h * rf_snr_per_watt(geom.d_u, fading, params),
    )


def simulate_blocks(n: int, alloc: BlockAllocation, geom: Geometry, params: SystemParams,
                    carryover: bool = True, h_vlc: float | None = None,
                    fading: RfFading = UNIT_FADING) -> list[LinkReport]:
    """Run ``n`` consecutive blocks with a constant allocation.

    The first block starts with an empty store. With ``carryover`` the RF-phase
    harvest of each block is spent in the next one.
    """
    if n < 1:
        raise ValueError("n >= 1 violated")
    if h_vlc is None:
        h_vlc = fixed_orientation_gain(geom, lambertian_order(geom.theta_hpbw))
    reports = []
    e2_prev = 0.0
    for _ in range(n):
        rep = link_report(alloc, e2_prev, h_vlc, geom, params, fading)
        reports.append(rep)
        e2_prev = rep.e2 if carryover else 0.0
    return reports
