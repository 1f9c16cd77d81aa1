"""Pure numpy implementations of the hot loops.

Both functions share their signatures with the compiled versions in
``_ckernels.pyx``; the two are checked against each other in the tests.
"""

import numpy as np


def scan_min_rate(vlc_unit, e1_unit, e2_unit, t_values, zeta, b_rf, r_th):
    """Maximize ``min(R_vlc, R_rf)`` over a bias-by-time grid.

    Parameters
    ----------
    vlc_unit : ndarray, shape (n_ib,)
        Optical rate per unit optical time at each bias.
    e1_unit : ndarray, shape (n_ib,)
        Optical-phase energy per unit optical time at each bias.
    e2_unit : float
        RF-phase energy per unit RF time (zero without carryover).
    t_values : ndarray, shape (n_t,)
        Optical time fractions.
    zeta : float
        Received RF SNR per watt.
    b_rf, r_th : float
        RF bandwidth and the minimum RF rate.

    Returns
    -------
    tuple
        ``(i, j, value, feasible)``. The first maximum in row-major order
        wins, which favours the smaller bias and then the shorter optical
        phase. If no point reaches ``r_th`` the best infeasible point is
        returned with ``feasible = False``.
    """
    vlc_unit = np.asarray(vlc_unit, float)[:, None]
    e1_unit = np.asarray(e1_unit, float)[:, None]
    t = np.asarray(t_values, float)[None, :]
    s = 1.0 - t
    r_vlc = t * vlc_unit
    energy = t * e1_unit + s * e2_unit
    r_rf = s * b_rf * np.log2(1.0 + zeta * energy / s)
    phi = np.minimum(r_vlc, r_rf)
    feasible = r_rf >= r_th
    if feasible.any():
        masked = np.where(feasible, phi, -np.inf)
        k = int(np.argmax(masked))
        ok = True
    else:
        masked = phi
        k = int(np.argmax(phi))
        ok = False
    i, j = divmod(k, phi.shape[1])
    return i, j, float(masked.flat[k]), ok


def mc_moments(h, snr_coef, rate_vlc, e1_scale, k1, e2_scale, k2, i0, t_rf, b_rf, zeta,
               shift_vlc, shift_e, shift_rf):
    """Shifted sums and sums of squares of per-sample rate and energy.

    Returns an array ``[sum dv, sum dv^2, sum de, sum de^2, sum dr, sum dr^2]``
    where ``dv``, ``de``, ``dr`` are the optical rate, harvested energy and
    RF rate minus their shifts.
    """
    h = np.asarray(h, float)
    r_vlc = rate_vlc * np.log2(1.0 + snr_coef * h * h)
    c1 = k1 * h
    c2 = k2 * h
    energy = e1_scale * c1 * np.log1p(c1 / i0) + e2_scale * c2 * np.log1p(c2 / i0)
    r_rf = t_rf * b_rf * np.log2(1.0 + zeta * energy / t_rf)
    dv, de, dr = r_vlc - shift_vlc, energy - shift_e, r_rf - shift_rf
    return np.array([dv.sum(), (dv * dv).sum(), de.sum(), (de * de).sum(),
                     dr.sum(), (dr * dr).sum()])
