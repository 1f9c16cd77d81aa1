"""Hot-loop kernels with a compiled backend and a numpy fallback.

The compiled extension is used when it was built at install time. Setting
``HARVEST_KERNELS=python`` forces the numpy fallback. ``BACKEND`` names the
active choice; ``python_backend`` and ``compiled_backend`` expose both
implementations (the latter is ``None`` when the extension is missing).
"""

import os
from dataclasses import astuple, dataclass

from . import _pykernels as python_backend

try:
    from . import _ckernels as compiled_backend
except ImportError:  # extension not built
    compiled_backend = None

if compiled_backend is not None and os.environ.get("HARVEST_KERNELS", "").lower() != "python":
    _active = compiled_backend
    BACKEND = "cython"
else:
    _active = python_backend
    BACKEND = "python"


@dataclass(frozen=True)
class McCoefficients:
    """Per-sample constants of the Monte Carlo reduction.

    ``snr_coef * h**2`` is the optical SNR, ``rate_vlc`` the optical rate
    scale, ``e*_scale * (k* h) * ln(1 + k* h / i0)`` the two harvest terms
    and ``zeta`` the RF SNR per watt.
    """

    snr_coef: float
    rate_vlc: float
    e1_scale: float
    k1: float
    e2_scale: float
    k2: float
    i0: float
    t_rf: float
    b_rf: float
    zeta: float


def scan_min_rate(vlc_unit, e1_unit, e2_unit, t_values, zeta, b_rf, r_th):
    """Grid argmax of the end-to-end rate; see ``_pykernels.scan_min_rate``."""
    return _active.scan_min_rate(vlc_unit, e1_unit, float(e2_unit), t_values, float(zeta),
                                 float(b_rf), float(r_th))


def mc_moments(h, coeffs: McCoefficients, shift):
    """Shifted first and second moment sums over gain samples ``h``."""
    return _active.mc_moments(h, *astuple(coeffs), float(shift[0]), float(shift[1]),
                              float(shift[2]))
