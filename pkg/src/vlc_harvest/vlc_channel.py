"""Line-of-sight optical channel gain and the statistics of a tilted receiver."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ._quadrature import QuadratureError
from .scenario import Geometry, OrientationModel


@dataclass(frozen=True)
class ChannelGain:
    """Optical DC gain split into a position part and a tilt part.

    Attributes
    ----------
    h_vlc : float or ndarray
        Total gain, zero outside the field of view.
    h_c : float
        Deterministic factor set by LED pattern and geometry.
    h_theta : float or ndarray
        Cosine of the incidence angle.
    in_fov : bool or ndarray
        Whether the incidence angle is within the half field of view.
    """

    h_vlc: float | np.ndarray
    h_c: float
    h_theta: float | np.ndarray
    in_fov: bool | np.ndarray


def deterministic_gain(geom: Geometry, m: float) -> float:
    """Gain at normal incidence for a relay at horizontal offset ``geom.d_r``.

    Parameters
    ----------
    geom : Geometry
    m : float
        Lambertian order of the LED.
    """
    h, d = geom.h_delta, geom.d_r
    return (m + 1) * geom.a_pd * h**m / (2 * math.pi) * (h * h + d * d) ** (-(m + 2) / 2)


def vlc_gain(geom: Geometry, m: float, theta_r) -> ChannelGain:
    """Optical gain for incidence angle ``theta_r`` (scalar or array, radians).

    The LED faces straight down, so the cosine of the irradiance angle is
    ``h_delta / sqrt(h_delta**2 + d_r**2)``.
    """
    h, d = geom.h_delta, geom.d_r
    dist_sq = h * h + d * d
    cos_irr = h / math.sqrt(dist_sq)
    theta_r = np.asarray(theta_r, dtype=float)
    h_theta = np.cos(theta_r)
    in_fov = np.abs(theta_r) <= geom.phi_fov
    gain = (m + 1) * geom.a_pd / (2 * math.pi * dist_sq) * cos_irr**m * h_theta
    gain = np.where(in_fov, gain, 0.0)
    if gain.ndim == 0:
        return ChannelGain(float(gain), deterministic_gain(geom, m), float(h_theta), bool(in_fov))
    return ChannelGain(gain, deterministic_gain(geom, m), h_theta, in_fov)


def upward_incidence(geom: Geometry) -> float:
    """Incidence angle at an upward-facing photodiode placed at ``geom.d_r``."""
    return math.atan2(geom.d_r, geom.h_delta)


def fixed_orientation_gain(geom: Geometry, m: float) -> float:
    """Gain of an upward-facing relay photodiode at its geometric position."""
    return vlc_gain(geom, m, upward_incidence(geom)).h_vlc


# --------------------------------------------------------------------------
# Orientation statistics


def _cos2_density_unnormalized(theta1, theta2, t):
    t = np.asarray(t, dtype=float)
    lo, hi = math.cos(theta2) ** 2, math.cos(theta1) ** 2
    inside = (t > lo) & (t < hi)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = 1.0 / ((theta2 - theta1) * np.sqrt(4 * t * (1 - t)))
    return np.where(inside, val, 0.0)


def normalization_constant(model: OrientationModel) -> float:
    """Constant that makes the density of ``cos(theta)**2`` integrate to one.

    The integral is taken over the squared-cosine variable with its own
    Jacobian, independently of the angle substitution used elsewhere.

    Raises
    ------
    ValueError
        For an empty interval.
    QuadratureError
        If the integrator does not converge.
    """
    t1, t2 = model.theta1, model.theta2
    if not t2 > t1:
        raise ValueError("orientation interval has zero length")
    # In the squared-cosine variable t the density has inverse square-root
    # singularities at t = 0 and t = 1. Split at t = 1/2 and substitute
    # t = v**2 on the lower part and t = 1 - v**2 on the upper part; both give
    # the bounded integrand 1 / sqrt(1 - v**2). The end points in v are
    # cos(theta2) and sin(theta1), computed without cancellation.
    lo, hi = math.cos(t2) ** 2, math.cos(t1) ** 2
    pieces = []
    if lo < 0.5:
        pieces.append((math.cos(t2), math.sqrt(min(hi, 0.5))))
    if hi > 0.5:
        pieces.append((math.sin(t1), math.sqrt(1.0 - max(lo, 0.5))))
    total, err = 0.0, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in pieces:
            val, e = integrate.quad(lambda v: 1.0 / math.sqrt(1.0 - v * v), a, b,
                                    epsabs=1e-14, epsrel=1e-13, limit=200)
            total += val
            err += e
    total /= t2 - t1
    err /= t2 - t1
    if not math.isfinite(total) or err > 1e-10:
        raise QuadratureError("normalization integral did not converge", err)
    return 1.0 / total


@dataclass(frozen=True)
class OrientationDensity:
    """Probability density of a tilt-dependent channel quantity.

    ``kind`` is ``"cos_squared_channel"`` for the squared gain or
    ``"cos_channel"`` for the gain itself. Calling the object evaluates the
    density; it is zero outside ``support``.
    """

    kind: str
    support: tuple[float, float]
    model: OrientationModel
    h_c: float

    def __call__(self, x):
        if self.kind == "cos_squared_channel":
            return cos2_density(self.model, self.h_c, x)
        return cos_density(self.model, self.h_c, x)


def cos2_density(model: OrientationModel, h_c: float, x):
    """Density of the squared gain ``h**2 = h_c**2 cos(theta)**2``."""
    t = np.asarray(x, dtype=float) / h_c**2
    val = model.c_theta * _cos2_density_unnormalized(model.theta1, model.theta2, t) / h_c**2
    return val if val.ndim else float(val)


def cos_density(model: OrientationModel, h_c: float, x):
    """Density of the gain ``h = h_c cos(theta)``.

    This is ``1 / ((theta2 - theta1) sqrt(h_c**2 - x**2))`` on
    ``[h_c cos(theta2), h_c cos(theta1)]``.
    """
    x = np.asarray(x, dtype=float)
    lo, hi = h_c * math.cos(model.theta2), h_c * math.cos(model.theta1)
    inside = (x > lo) & (x < hi)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = model.c_theta / (model.spread * np.sqrt(h_c * h_c - x * x))
    val = np.where(inside, val, 0.0)
    return val if val.ndim else float(val)


def orientation_density(model: OrientationModel, h_c: float, kind="cos_squared_channel"):
    """Build an :class:`OrientationDensity` with its support."""
    if kind == "cos_squared_channel":
        support = (h_c**2 * math.cos(model.theta2) ** 2, h_c**2 * math.cos(model.theta1) ** 2)
    elif kind == "cos_channel":
        support = (h_c * math.cos(model.theta2), h_c * math.cos(model.theta1))
    else:
        raise ValueError(f"unknown density kind {kind!r}")
    return OrientationDensity(kind, support, model, h_c)


def sample_orientation(model: OrientationModel, rng, size=None):
    """Draw tilt angles uniformly from ``[theta1, theta2]``.

    Parameters
    ----------
    rng : numpy.random.Generator or int
        Generator owned by the caller, or a seed for a fresh one.
    size : int, optional
        Number of samples; a scalar is returned when omitted.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    return rng.uniform(model.theta1, model.theta2, size=size)
