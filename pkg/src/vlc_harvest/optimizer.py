"""Joint choice of LED bias and time split that maximizes the relayed rate.

The end-to-end rate ``min(R_vlc, R_rf)`` is maximized over the DC bias and
the optical time fraction. The bias is restricted to the upper half of the
LED range with the amplitude at its clipping limit, ``A = i_max - I_b``. On
that interval the optical rate falls and the harvested energy rises with
the bias, so every sub-problem reduces to a scalar crossing.

Solvers
-------
``solve_cyclic``
    Alternates a bias step (with a tangent minorizer of the energy) and a
    time step until the two step values agree.
``solve_fixed_time``
    Optimizes the bias only, at a fixed time split.
``solve_grid``, ``solve_random_orientation``
    Exhaustive scans used as oracles and for the orientation-averaged
    objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import kernels
from .link_budget import (
    OPTICAL_SNR_FACTOR, UNIT_FADING, RfFading, harvest_phase1_values, harvest_phase2,
    rf_snr_per_watt, vlc_rate_values,
)
from .orientation_stats import harvest_closed_values, vlc_rate_bound_values
from .scenario import (
    CaseId, Geometry, OrientationModel, PolicyCase, SystemParams, lambertian_order,
    shot_noise_power,
)
from .vlc_channel import deterministic_gain, fixed_orientation_gain

# Time fractions are kept strictly inside (0, 1).
T_EPS = 1e-9
HIGH_SNR_MIN = 10.0
LN2 = math.log(2.0)


@dataclass(frozen=True)
class LinkContext:
    """Everything a sub-problem needs about one link realisation.

    Attributes
    ----------
    params : SystemParams
    h_vlc : float
        Optical gain of the first hop.
    zeta : float
        RF SNR per watt of transmit power.
    carryover : bool
        Whether the RF-phase harvest of the previous block is available.
    """

    params: SystemParams
    h_vlc: float
    zeta: float
    carryover: bool = True

    @classmethod
    def build(cls, geom: Geometry, params: SystemParams, carryover: bool = True,
              fading: RfFading = UNIT_FADING, h_vlc: float | None = None) -> "LinkContext":
        if h_vlc is None:
            h_vlc = fixed_orientation_gain(geom, lambertian_order(geom.theta_hpbw))
        return cls(params, float(h_vlc), float(rf_snr_per_watt(geom.d_u, fading, params)),
                   carryover)

    # coefficients of the scalar model --------------------------------------
    @property
    def alpha(self) -> float:
        """Optical SNR per squared ampere of amplitude."""
        p = self.params
        return OPTICAL_SNR_FACTOR * (p.eta * p.p_led * self.h_vlc) ** 2 / shot_noise_power(p)

    @property
    def beta(self) -> float:
        """DC photocurrent per ampere of LED bias."""
        return self.params.eta * self.h_vlc * self.params.p_led

    @property
    def z(self) -> float:
        """Energy scale of the harvester per ampere of bias (J/A)."""
        return 0.75 * self.beta * self.params.v_t

    @property
    def bias_low(self) -> float:
        return 0.5 * (self.params.i_min + self.params.i_max)

    @property
    def bias_high(self) -> float:
        return self.params.i_max

    # rates and energies -----------------------------------------------------
    def amplitude(self, i_b):
        return self.params.i_max - np.asarray(i_b, float)

    def r_vlc(self, i_b, t):
        return vlc_rate_values(self.amplitude(i_b), t, self.h_vlc, self.params)

    def e1(self, i_b, t):
        return harvest_phase1_values(i_b, t, self.h_vlc, self.params)

    def carried(self, t, e2_prev):
        """Energy carried over from the previous block."""
        if not self.carryover:
            return 0.0 * np.asarray(t, float)
        if e2_prev is None:
            return harvest_phase2(1.0 - np.asarray(t, float), self.h_vlc, self.params)
        return e2_prev + 0.0 * np.asarray(t, float)

    def d_carried_dt(self, e2_prev):
        if not self.carryover or e2_prev is not None:
            return 0.0
        return -float(harvest_phase2(1.0, self.h_vlc, self.params))

    def energy(self, i_b, t, e2_prev):
        return self.e1(i_b, t) + self.carried(t, e2_prev)

    def r_rf_at(self, t, energy):
        s = 1.0 - np.asarray(t, float)
        energy = np.maximum(energy, 0.0)
        return s * self.params.b_rf * np.log2(1.0 + self.zeta * energy / s)

    def r_rf(self, i_b, t, e2_prev):
        return self.r_rf_at(t, self.energy(i_b, t, e2_prev))

    def phi(self, i_b, t, e2_prev):
        return np.minimum(self.r_vlc(i_b, t), self.r_rf(i_b, t, e2_prev))

    def rate_partials(self, i_b, t, e2_prev):
        """Partial derivatives of both rates.

        Returns
        -------
        tuple
            ``(dRvlc/dI, dRvlc/dt, dRrf/dI, dRrf/dt)``.
        """
        p = self.params
        a = p.i_max - i_b
        snr = self.alpha * a * a
        dv_di = -t * p.b_vlc * 2.0 * self.alpha * a / ((1.0 + snr) * LN2)
        dv_dt = p.b_vlc * math.log2(1.0 + snr)
        s = 1.0 - t
        e = float(self.energy(i_b, t, e2_prev))
        u = self.zeta * e / s
        de_di = energy_slope(i_b, t, self)
        de_dt = float(self.e1(i_b, 1.0)) + self.d_carried_dt(e2_prev)
        dr_de = p.b_rf * self.zeta / ((1.0 + u) * LN2)
        dr_di = dr_de * de_di
        dr_dt = -p.b_rf * math.log2(1.0 + u) + dr_de * (de_dt * s + e) / s
        return dv_di, dv_dt, dr_di, dr_dt


def energy_slope(i_b, t_vlc, ctx: LinkContext) -> float:
    """Derivative of the optical-phase harvest with respect to the bias."""
    x = ctx.beta * i_b / ctx.params.i_dark
    return ctx.z * t_vlc * (math.log1p(x) + x / (1.0 + x))


@dataclass(frozen=True)
class Affine:
    """Tangent ``g0 + slope * (I - i_ref)`` of the harvested energy."""

    g0: float
    slope: float
    i_ref: float

    def __call__(self, i_b):
        return self.g0 + self.slope * (np.asarray(i_b, float) - self.i_ref)


def mm_linearize(i_b_t: float, t_vlc: float, ctx: LinkContext, e2_prev=None) -> Affine:
    """Tangent minorizer of the harvested energy at bias ``i_b_t``.

    ``I ln(1 + c I)`` is convex for ``c > 0``, so the tangent lies below the
    energy everywhere and touches it at ``i_b_t``.

    Raises
    ------
    ValueError
        If ``i_b_t`` is not positive (the logarithm is undefined).
    """
    if not i_b_t > 0:
        raise ValueError("mm_linearize requires a positive bias")
    g0 = float(ctx.energy(i_b_t, t_vlc, e2_prev))
    return Affine(g0, energy_slope(i_b_t, t_vlc, ctx), i_b_t)


# --------------------------------------------------------------------------
# Sub-problem results


@dataclass(frozen=True)
class BiasStep:
    """Outcome of the bias sub-problem at fixed time split."""

    i_b: float
    a_peak: float
    e_h: float
    phi: float
    feasible: bool
    iterations: int
    converged: bool
    trace: tuple = ()


@dataclass(frozen=True)
class TimeStep:
    """Outcome of the time-split sub-problem at fixed bias."""

    t_vlc: float
    t_rf: float
    e_h: float
    phi: float
    feasible: bool


def _bias_threshold(t, e2_prev, ctx: LinkContext):
    """Smallest bias meeting the RF rate floor, or ``None`` if none does."""
    lo, hi = ctx.bias_low, ctx.bias_high
    r_th = ctx.params.r_th
    if float(ctx.r_rf(hi, t, e2_prev)) < r_th:
        return None
    if float(ctx.r_rf(lo, t, e2_prev)) >= r_th:
        return lo
    return brentq(lambda x: float(ctx.r_rf(x, t, e2_prev)) - r_th, lo, hi, xtol=1e-14)


def solve_subproblem1(t_vlc: float, e2_prev, ctx: LinkContext, i_init: float | None = None,
                      tol: float = 1e-6, max_iter: int = 50) -> BiasStep:
    """Best bias for a fixed time split, by tangent-minorizer iterations.

    Each iteration replaces the energy by its tangent at the current bias and
    solves the resulting monotone crossing exactly. The crossing of the
    surrogate problem is never worse than the previous iterate, so the true
    objective does not decrease.

    Parameters
    ----------
    t_vlc : float
        Optical time fraction in (0, 1).
    e2_prev : float or None
        Carried-over energy; ``None`` means the previous block used the same
        allocation.
    ctx : LinkContext
    i_init : float, optional
        Starting bias; defaults to the middle of the restricted interval.
    """
    if not 0 < t_vlc < 1:
        raise ValueError("t_vlc must lie in (0, 1)")
    lo, hi = ctx.bias_low, ctx.bias_high
    floor = _bias_threshold(t_vlc, e2_prev, ctx)
    if floor is None:
        e = float(ctx.energy(hi, t_vlc, e2_prev))
        return BiasStep(hi, 0.0, e, float(ctx.phi(hi, t_vlc, e2_prev)), False, 0, True)
    lo = max(lo, floor)
    i_cur = 0.5 * (ctx.bias_low + hi) if i_init is None else i_init
    i_cur = min(max(i_cur, lo), hi)
    trace = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        surrogate = mm_linearize(i_cur, t_vlc, ctx, e2_prev)

        def gap(x):
            return float(ctx.r_vlc(x, t_vlc)) - float(ctx.r_rf_at(t_vlc, surrogate(x)))

        if gap(lo) <= 0:
            i_new = lo
        else:
            i_new = brentq(gap, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps)
        sur_val = min(float(ctx.r_vlc(i_new, t_vlc)),
                      float(ctx.r_rf_at(t_vlc, surrogate(i_new))))
        trace.append((i_new, sur_val, float(ctx.phi(i_new, t_vlc, e2_prev))))
        step = abs(i_new - i_cur)
        i_cur = i_new
        if step < tol:
            converged = True
            break
    e_h = float(ctx.energy(i_cur, t_vlc, e2_prev))
    return BiasStep(i_cur, float(ctx.amplitude(i_cur)), e_h,
                    float(ctx.phi(i_cur, t_vlc, e2_prev)), True, it, converged, tuple(trace))


def _maximize_scalar(func, lo, hi):
    res = minimize_scalar(lambda x: -func(x), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    x = float(res.x)
    # the bounded method never evaluates the end points themselves
    best = max(((func(v), v) for v in (lo, hi, x)), key=lambda p: p[0])
    return best[1], best[0]


def solve_subproblem2(i_b: float, a_peak: float, e2_prev, ctx: LinkContext) -> TimeStep:
    """Best time split for a fixed bias and amplitude.

    The optical rate grows linearly in ``t_vlc`` while the RF rate is concave,
    so their difference is convex with a single sign change. The optimum is
    the RF-rate peak if the optical hop is already faster there, else the
    crossing to its right, clipped to the interval where the RF rate meets
    its floor.
    """
    p = ctx.params
    lo, hi = T_EPS, 1.0 - T_EPS

    def r_v(t):
        return float(vlc_rate_values(a_peak, t, ctx.h_vlc, p))

    def r_r(t):
        return float(ctx.r_rf(i_b, t, e2_prev))

    t_peak, r_peak = _maximize_scalar(r_r, lo, hi)
    if r_peak < p.r_th:
        return TimeStep(t_peak, 1.0 - t_peak, float(ctx.energy(i_b, t_peak, e2_prev)),
                        min(r_v(t_peak), r_peak), False)
    if r_v(t_peak) >= r_peak:
        t_opt = t_peak
    else:
        t_opt = brentq(lambda t: r_v(t) - r_r(t), t_peak, hi, xtol=1e-14)
        if r_r(hi) < p.r_th:
            t_edge = brentq(lambda t: r_r(t) - p.r_th, t_peak, hi, xtol=1e-14)
            t_opt = min(t_opt, t_edge)
    return TimeStep(t_opt, 1.0 - t_opt, float(ctx.energy(i_b, t_opt, e2_prev)),
                    min(r_v(t_opt), r_r(t_opt)), True)


# --------------------------------------------------------------------------
# Full solvers


@dataclass(frozen=True)
class OptimizerState:
    """Snapshot of the cyclic solver after an outer iteration."""

    phi: float
    i_b_iter: float
    iteration: int
    history: tuple = ()
    converged: bool = False


@dataclass(frozen=True)
class OptimizationResult:
    """Optimal allocation and the link quantities it achieves.

    ``high_snr_ok`` reports whether the optical SNR at the optimum exceeds
    ten, the regime in which the restricted bias interval is justified.
    ``history`` holds ``(phi_sub1, phi_sub2)`` pairs for the cyclic solver.
    """

    i_b_opt: float
    t_vlc_opt: float
    rate_opt: float
    case_id: CaseId
    iterations: int
    feasible: bool
    solver: str
    converged: bool = True
    a_peak: float = 0.0
    r_vlc: float = 0.0
    r_rf: float = 0.0
    e1: float = 0.0
    e2: float = 0.0
    e_h: float = 0.0
    high_snr_ok: bool = True
    history: tuple = field(default=(), repr=False)


def _result(case, ctx: LinkContext, i_b, t, e2_prev, solver, iterations, converged=True,
            history=()):
    r_v = float(ctx.r_vlc(i_b, t))
    e1 = float(ctx.e1(i_b, t))
    carried = float(ctx.carried(t, e2_prev))
    e_h = e1 + carried
    r_r = float(ctx.r_rf_at(t, e_h))
    a = float(ctx.amplitude(i_b))
    return OptimizationResult(
        i_b_opt=float(i_b), t_vlc_opt=float(t), rate_opt=min(r_v, r_r), case_id=case.case_id,
        iterations=iterations, feasible=r_r >= ctx.params.r_th, solver=solver,
        converged=converged, a_peak=a, r_vlc=r_v, r_rf=r_r, e1=e1,
        e2=float(harvest_phase2(1.0 - t, ctx.h_vlc, ctx.params)) if ctx.carryover else 0.0,
        e_h=e_h, high_snr_ok=ctx.alpha * a * a > HIGH_SNR_MIN, history=tuple(history),
    )


def _context_for(case: PolicyCase, geom, params, fading, h_vlc, context):
    if context is not None:
        return replace(context, carryover=case.carryover)
    return LinkContext.build(geom, params, case.carryover, fading, h_vlc)


def _tangent_search(i_b, t, e2_prev, ctx: LinkContext):
    """Search along the tangent of the equal-rate curve through ``(i_b, t)``.

    Returns ``(phi, i_b, t)`` of the best feasible point on the line or
    ``None`` when the bias sits on a bound of its interval.
    """
    lo, hi = ctx.bias_low, ctx.bias_high
    if not lo + 1e-12 < i_b < hi - 1e-12:
        return None
    dv_di, dv_dt, dr_di, dr_dt = ctx.rate_partials(i_b, t, e2_prev)
    denom = dv_di - dr_di
    if denom == 0:
        return None
    slope = -(dv_dt - dr_dt) / denom
    r_th = ctx.params.r_th

    def along(tt):
        x = min(max(i_b + slope * (tt - t), lo), hi)
        return x

    def value(tt):
        x = along(tt)
        if float(ctx.r_rf(x, tt, e2_prev)) < r_th:
            return 0.0
        return float(ctx.phi(x, tt, e2_prev))

    t_best, v_best = _maximize_scalar(value, T_EPS, 1.0 - T_EPS)
    return v_best, along(t_best), t_best


def _ridge_point(t, e2_prev, ctx: LinkContext):
    """Best bias at time split ``t`` for the exact energy, with its value.

    At fixed ``t`` the optical rate falls and the RF rate rises with the bias,
    so the best bias is their crossing, raised to the RF rate floor and kept
    inside the bias interval. Returns ``(phi, i_b)``; ``phi`` is ``-inf`` when
    no bias meets the floor.
    """
    floor = _bias_threshold(t, e2_prev, ctx)
    if floor is None:
        return -math.inf, ctx.bias_high
    lo, hi = max(ctx.bias_low, floor), ctx.bias_high

    def gap(x):
        return float(ctx.r_vlc(x, t)) - float(ctx.r_rf(x, t, e2_prev))

    if gap(lo) <= 0:
        i_b = lo
    else:
        i_b = brentq(gap, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps)
    return float(ctx.phi(i_b, t, e2_prev)), i_b


RIDGE_SCAN = 24


def _ridge_search(e2_prev, ctx: LinkContext):
    """Maximize over the time split with the bias kept on the equal-rate curve.

    A coarse scan brackets the best time split and a bounded Brent search
    refines it. Returns ``(phi, i_b, t)`` or ``None`` if nothing is feasible.
    """
    t_scan = np.linspace(T_EPS, 1.0 - T_EPS, RIDGE_SCAN + 2)[1:-1]
    vals = [_ridge_point(float(t), e2_prev, ctx)[0] for t in t_scan]
    k = int(np.argmax(vals))
    if vals[k] == -math.inf:
        return None
    lo = t_scan[k - 1] if k > 0 else T_EPS
    hi = t_scan[k + 1] if k + 1 < t_scan.size else 1.0 - T_EPS

    def value(t):
        v = _ridge_point(t, e2_prev, ctx)[0]
        return v if v > -math.inf else 0.0

    t_best, _ = _maximize_scalar(value, float(lo), float(hi))
    if value(t_best) < vals[k]:
        t_best = float(t_scan[k])
    phi, i_b = _ridge_point(t_best, e2_prev, ctx)
    return phi, i_b, t_best


def solve_cyclic(case: PolicyCase, geom: Geometry, params: SystemParams, e2_prev=None, *,
                 tol: float = 1e-4, max_outer: int = 30, fading: RfFading = UNIT_FADING,
                 h_vlc: float | None = None, context: LinkContext | None = None,
                 t_init: float = 0.5) -> OptimizationResult:
    """Joint bias and time optimization by alternating the two sub-problems.

    Each outer iteration solves the bias sub-problem at the current time
    split and then the time sub-problem. Holding the bias fixed in the time
    step would leave the iterate stuck at the first equal-rate point, so the
    time step also moves the bias: along the tangent of the equal-rate curve,
    and along the curve itself (the tangent alone stalls where the curve
    bends near the lower bias bound). Iterations
    stop when the two sub-problem values differ by less than ``tol``
    (relative) or after ``max_outer`` rounds.

    Parameters
    ----------
    case : PolicyCase
        A joint case; ``JO_noE2`` ignores ``e2_prev``.
    e2_prev : float or None
        Carried-over energy; ``None`` means steady state.
    """
    if not case.joint:
        raise ValueError(f"solve_cyclic handles joint cases, got {case.case_id.value}")
    ctx = _context_for(case, geom, params, fading, h_vlc, context)
    if not case.carryover:
        e2_prev = 0.0
    t = t_init
    i_b = (params.i_min + 3 * params.i_max) / 4
    history = []
    converged = False
    best = None
    for k in range(1, max_outer + 1):
        s1 = solve_subproblem1(t, e2_prev, ctx, i_init=i_b)
        i_b, phi1 = s1.i_b, s1.phi
        s2 = solve_subproblem2(i_b, s1.a_peak, e2_prev, ctx)
        cand = (s2.phi if s2.feasible else -math.inf, i_b, s2.t_vlc)
        steps = [_tangent_search(i_b, t, e2_prev, ctx)]
        if k == 1:
            # the curve search covers every time split, so once is enough
            steps.append(_ridge_search(e2_prev, ctx))
        for step in steps:
            if step is not None and step[0] > cand[0]:
                cand = step
        phi2, i_next, t_next = cand
        if not s1.feasible and phi2 == -math.inf:
            history.append((phi1, phi1))
            best = (phi1, i_b, t)
            break
        if phi2 < phi1:
            phi2, i_next, t_next = phi1, i_b, t
        history.append((phi1, phi2))
        best = (phi2, i_next, t_next)
        if abs(phi1 - phi2) <= tol * abs(phi2):
            converged = True
            break
        t, i_b = t_next, i_next
    _, i_opt, t_opt = best
    return _result(case, ctx, i_opt, t_opt, e2_prev, "cyclic", len(history), converged,
                   history)


def cyclic_states(result: OptimizationResult) -> list[OptimizerState]:
    """Expand a cyclic result's history into per-iteration states."""
    states = []
    for k, (p1, p2) in enumerate(result.history, start=1):
        states.append(OptimizerState(
            p2, result.i_b_opt, k, tuple(result.history[:k]),
            converged=result.converged and k == len(result.history)))
    return states


def solve_fixed_time(case: PolicyCase, geom: Geometry, params: SystemParams, e2_prev=None, *,
                     fading: RfFading = UNIT_FADING, h_vlc: float | None = None,
                     context: LinkContext | None = None) -> OptimizationResult:
    """Bias optimization at the case's fixed time split."""
    if case.joint:
        raise ValueError(f"solve_fixed_time handles fixed-time cases, got {case.case_id.value}")
    ctx = _context_for(case, geom, params, fading, h_vlc, context)
    if not case.carryover:
        e2_prev = 0.0
    s1 = solve_subproblem1(case.fixed_t_vlc, e2_prev, ctx)
    return _result(case, ctx, s1.i_b, case.fixed_t_vlc, e2_prev, "fixed_time", s1.iterations,
                   s1.converged)


def solve(case: PolicyCase, geom: Geometry, params: SystemParams, e2_prev=None,
          **kw) -> OptimizationResult:
    """Dispatch to the cyclic or fixed-time solver according to ``case``."""
    if case.joint:
        return solve_cyclic(case, geom, params, e2_prev, **kw)
    return solve_fixed_time(case, geom, params, e2_prev, **kw)


# --------------------------------------------------------------------------
# Grid scans


def bias_grid(params: SystemParams, step: float) -> np.ndarray:
    """Bias values from the interval midpoint to ``i_max`` in steps of ``step``."""
    lo = 0.5 * (params.i_min + params.i_max)
    n = int(math.floor((params.i_max - lo) / step + 1e-9))
    return np.minimum(lo + step * np.arange(n + 1), params.i_max)


def time_grid(step: float) -> np.ndarray:
    """Interior time fractions ``step, 2 step, ...`` below one."""
    n = int(math.floor(1.0 / step - 1e-9))
    t = step * np.arange(1, n + 1)
    return t[t < 1.0]


def grid_oracle(objective, bounds, steps):
    """Exhaustive maximization of ``objective(I, t)`` on a regular grid.

    Parameters
    ----------
    objective : callable
        Vectorized function of bias and time arrays (broadcast together).
    bounds : ((float, float), (float, float))
        Inclusive ranges for the bias and the time fraction.
    steps : (float, float)
        Grid spacings.

    Returns
    -------
    ((float, float), float)
        Maximizer and maximum. Ties go to the smaller bias, then the smaller
        time fraction. NaN values never win.
    """
    (i_lo, i_hi), (t_lo, t_hi) = bounds
    s_i, s_t = steps
    if s_i <= 0 or s_t <= 0:
        raise ValueError("grid steps must be positive")
    i_vals = i_lo + s_i * np.arange(int(math.floor((i_hi - i_lo) / s_i + 1e-9)) + 1)
    t_vals = t_lo + s_t * np.arange(int(math.floor((t_hi - t_lo) / s_t + 1e-9)) + 1)
    values = np.asarray(objective(i_vals[:, None], t_vals[None, :]), float)
    values = np.broadcast_to(values, (i_vals.size, t_vals.size))
    values = np.where(np.isnan(values), -np.inf, values)
    k = int(np.argmax(values))
    i, j = divmod(k, t_vals.size)
    return (float(i_vals[i]), float(t_vals[j])), float(values[i, j])


def _scan(case, ib, t_vals, vlc_unit, e1_unit, e2_unit, zeta, params):
    i, j, val, ok = kernels.scan_min_rate(vlc_unit, e1_unit, e2_unit, t_vals, zeta,
                                          params.b_rf, params.r_th)
    return float(ib[i]), float(t_vals[j]), ok


def solve_grid(case: PolicyCase, geom: Geometry, params: SystemParams, *,
               step_ib: float = 1e-3, step_t: float = 1e-3, fading: RfFading = UNIT_FADING,
               h_vlc: float | None = None) -> OptimizationResult:
    """Exhaustive grid optimum for a fixed orientation in steady state.

    Fixed-time cases scan only the bias.
    """
    ctx = LinkContext.build(geom, params, case.carryover, fading, h_vlc)
    ib = bias_grid(params, step_ib)
    t_vals = time_grid(step_t) if case.joint else np.array([case.fixed_t_vlc])
    vlc_unit = np.asarray(ctx.r_vlc(ib, 1.0), float)
    e1_unit = np.asarray(ctx.e1(ib, 1.0), float)
    e2_unit = float(harvest_phase2(1.0, ctx.h_vlc, params)) if case.carryover else 0.0
    i_opt, t_opt, _ = _scan(case, ib, t_vals, vlc_unit, e1_unit, e2_unit, ctx.zeta, params)
    e2_prev = None if case.carryover else 0.0
    return _result(case, ctx, i_opt, t_opt, e2_prev, "grid", ib.size * t_vals.size)


def solve_random_orientation(case: PolicyCase, model: OrientationModel, geom: Geometry,
                             params: SystemParams, *, step_ib: float = 5e-3,
                             step_t: float = 5e-3,
                             fading: RfFading = UNIT_FADING) -> OptimizationResult:
    """Grid optimum of the orientation-averaged objective.

    The objective is the minimum of the closed-form average optical rate and
    the RF rate at the closed-form average energy. Cases without carryover
    drop the RF-phase harvest; fixed-time cases scan only the bias. If no
    grid point meets the RF rate floor, the best infeasible point is returned
    with ``feasible = False``.
    """
    if model.theta2 > geom.phi_fov:
        raise ValueError("theta2 <= phi_fov violated: the LED must stay in the field of view")
    h_c = deterministic_gain(geom, lambertian_order(geom.theta_hpbw))
    zeta = float(rf_snr_per_watt(geom.d_u, fading, params))
    ib = bias_grid(params, step_ib)
    t_vals = time_grid(step_t) if case.joint else np.array([case.fixed_t_vlc])
    amp = params.i_max - ib
    vlc_unit = np.asarray(vlc_rate_bound_values(amp, 1.0, model, h_c, params), float)
    e1_unit = np.asarray(harvest_closed_values(ib, 1.0, 0.0, model, h_c, params, "none"), float)
    e2_unit = (float(harvest_closed_values(params.i_max, 0.0, 1.0, model, h_c, params,
                                           "carryover")) if case.carryover else 0.0)
    i, j, _, ok = kernels.scan_min_rate(vlc_unit, e1_unit, e2_unit, t_vals, zeta,
                                        params.b_rf, params.r_th)
    t = float(t_vals[j])
    s = 1.0 - t
    r_v = t * vlc_unit[i]
    e1 = t * e1_unit[i]
    e2 = s * e2_unit
    r_r = s * params.b_rf * math.log2(1.0 + zeta * (e1 + e2) / s)
    a = float(amp[i])
    l2 = OPTICAL_SNR_FACTOR * (params.eta * params.p_led * a * h_c) ** 2 / shot_noise_power(params)
    return OptimizationResult(
        i_b_opt=float(ib[i]), t_vlc_opt=t, rate_opt=float(min(r_v, r_r)), case_id=case.case_id,
        iterations=int(ib.size * t_vals.size), feasible=bool(ok), solver="grid",
        a_peak=a, r_vlc=float(r_v), r_rf=float(r_r), e1=float(e1), e2=float(e2),
        e_h=float(e1 + e2), high_snr_ok=l2 * math.cos(model.theta2) ** 2 > HIGH_SNR_MIN,
    )
