"""Thin wrappers over QUADPACK with strict error reporting."""

import math
import warnings

from scipy import integrate

EPSABS = 1e-10
EPSREL = 1e-8


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance.

    Attributes
    ----------
    achieved : float
        Absolute error estimate reported by the integrator.
    """

    def __init__(self, message, achieved):
        super().__init__(f"{message} (achieved abs. error {achieved:.3e})")
        self.achieved = achieved


def adaptive_quad(func, a, b, epsabs=EPSABS, epsrel=EPSREL, limit=200):
    """Integrate ``func`` over ``[a, b]`` by adaptive Gauss-Kronrod."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, abserr, info = integrate.quad(
            func, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1
        )[:3]
    tol = max(epsabs, epsrel * abs(value))
    if not math.isfinite(value) or abserr > 10 * tol:
        raise QuadratureError("adaptive quadrature failed to converge", abserr)
    return value


def arcsine_weighted_integral(g, u_lo, u_hi, **kw):
    """Integrate ``g(t) / sqrt(4 t (1 - t))`` with ``t = sin(u)**2``.

    The substitution turns the endpoint singularities into a smooth integrand,
    ``g(sin(u)**2)``, over ``u`` in ``[u_lo, u_hi]``. Callers pass the angle
    limits directly to avoid cancellation near ``t = 1``.
    """
    return adaptive_quad(lambda u: g(math.sin(u) ** 2), u_lo, u_hi, **kw)
