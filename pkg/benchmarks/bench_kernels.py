"""Compare the compiled kernels with the numpy fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat N]

Times the 1e-3 grid scan (451 x 999 points) and a 10**6-sample Monte Carlo
reduction with each available backend, and checks that both return the
same answers.
"""

import argparse
import math
import timeit
from dataclasses import astuple

import numpy as np

from vlc_harvest import kernels
from vlc_harvest.kernels import McCoefficients
from vlc_harvest.link_budget import harvest_phase2
from vlc_harvest.optimizer import LinkContext, bias_grid, time_grid
from vlc_harvest.scenario import Geometry, SystemParams


def grid_inputs():
    params, geom = SystemParams(), Geometry()
    ctx = LinkContext.build(geom, params)
    ib = bias_grid(params, 1e-3)
    return (np.asarray(ctx.r_vlc(ib, 1.0)), np.asarray(ctx.e1(ib, 1.0)),
            float(harvest_phase2(1.0, ctx.h_vlc, params)), time_grid(1e-3), ctx.zeta,
            params.b_rf, params.r_th)


def mc_inputs(n=1_000_000, seed=0):
    params, geom = SystemParams(), Geometry()
    ctx = LinkContext.build(geom, params)
    rng = np.random.default_rng(seed)
    h = ctx.h_vlc * np.cos(rng.uniform(0.0, math.radians(10.0), n))
    a_peak, i_b, t_vlc = 0.2, 0.8, 0.8
    ep = params.eta * params.p_led
    coeffs = McCoefficients(
        snr_coef=ctx.alpha / ctx.h_vlc**2 * a_peak**2, rate_vlc=t_vlc * params.b_vlc,
        e1_scale=0.75 * t_vlc * params.v_t, k1=ep * i_b,
        e2_scale=0.75 * (1 - t_vlc) * params.v_t, k2=ep * params.i_max,
        i0=params.i_dark, t_rf=1 - t_vlc, b_rf=params.b_rf, zeta=ctx.zeta)
    return h, coeffs, np.zeros(3)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = {"python": kernels.python_backend}
    if kernels.compiled_backend is not None:
        backends["cython"] = kernels.compiled_backend
    else:
        print("compiled backend unavailable; timing the fallback only")

    g_args = grid_inputs()
    h, coeffs, shift = mc_inputs()
    mc_args = (h, *astuple(coeffs), *shift)
    results = {}
    print(f"{'kernel':<16}{'backend':<10}{'best of ' + str(args.repeat):>14}")
    for name, mod in backends.items():
        t_grid = min(timeit.repeat(lambda: mod.scan_min_rate(*g_args), number=1,
                                   repeat=args.repeat))
        t_mc = min(timeit.repeat(lambda: mod.mc_moments(*mc_args), number=1,
                                 repeat=args.repeat))
        results[name] = (mod.scan_min_rate(*g_args), mod.mc_moments(*mc_args))
        print(f"{'scan_min_rate':<16}{name:<10}{t_grid * 1e3:>11.2f} ms")
        print(f"{'mc_moments':<16}{name:<10}{t_mc * 1e3:>11.2f} ms")
    if len(results) == 2:
        (g_py, m_py), (g_c, m_c) = results["python"], results["cython"]
        same_grid = g_py[:2] == g_c[:2] and math.isclose(g_py[2], g_c[2], rel_tol=1e-12)
        same_mc = np.allclose(m_py, m_c, rtol=1e-9)
        print(f"grid argmax identical: {same_grid}; Monte Carlo sums agree: {same_mc}")


if __name__ == "__main__":
    main()
