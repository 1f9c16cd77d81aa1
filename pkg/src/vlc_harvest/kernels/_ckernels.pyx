# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops; see ``_pykernels`` for the contract."""

import numpy as np
from libc.math cimport log2, log1p, INFINITY


def scan_min_rate(vlc_unit, e1_unit, double e2_unit, t_values, double zeta,
                  double b_rf, double r_th):
    cdef double[::1] vu = np.ascontiguousarray(vlc_unit, dtype=np.float64)
    cdef double[::1] eu = np.ascontiguousarray(e1_unit, dtype=np.float64)
    cdef double[::1] tv = np.ascontiguousarray(t_values, dtype=np.float64)
    cdef Py_ssize_t n_i = vu.shape[0], n_t = tv.shape[0], i, j
    cdef Py_ssize_t bi = 0, bj = 0, ai = 0, aj = 0
    cdef double best = -INFINITY, best_any = -INFINITY
    cdef double t, s, rv, rr, phi
    cdef bint found = False
    with nogil:
        for i in range(n_i):
            for j in range(n_t):
                t = tv[j]
                s = 1.0 - t
                rv = t * vu[i]
                rr = s * b_rf * log2(1.0 + zeta * (t * eu[i] + s * e2_unit) / s)
                phi = rv if rv < rr else rr
                if phi > best_any:
                    best_any = phi
                    ai = i
                    aj = j
                if rr >= r_th and phi > best:
                    best = phi
                    bi = i
                    bj = j
                    found = True
    if found:
        return int(bi), int(bj), best, True
    return int(ai), int(aj), best_any, False


def mc_moments(h, double snr_coef, double rate_vlc, double e1_scale, double k1,
               double e2_scale, double k2, double i0, double t_rf, double b_rf,
               double zeta, double shift_vlc, double shift_e, double shift_rf):
    cdef double[::1] hv = np.ascontiguousarray(h, dtype=np.float64)
    cdef Py_ssize_t n = hv.shape[0], k
    cdef double x, rv, c1, c2, e, rr, dv, de, dr
    cdef double sv = 0, svv = 0, se = 0, see = 0, sr = 0, srr = 0
    cdef double scale_rf = t_rf * b_rf
    with nogil:
        for k in range(n):
            x = hv[k]
            rv = rate_vlc * log2(1.0 + snr_coef * x * x)
            c1 = k1 * x
            c2 = k2 * x
            e = e1_scale * c1 * log1p(c1 / i0) + e2_scale * c2 * log1p(c2 / i0)
            rr = scale_rf * log2(1.0 + zeta * e / t_rf)
            dv = rv - shift_vlc
            de = e - shift_e
            dr = rr - shift_rf
            sv += dv
            svv += dv * dv
            se += de
            see += de * de
            sr += dr
            srr += dr * dr
    return np.array([sv, svv, se, see, sr, srr])
