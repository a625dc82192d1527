"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
NumPy fallback in ``_pykernels``.  Set ``JCAM_PURE_PYTHON=1`` to force the
fallback.
"""

from __future__ import annotations

import os

import numpy as np

from . import _pykernels

if os.environ.get("JCAM_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"


def _f(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def _i8(a):
    return np.ascontiguousarray(a, dtype=np.int8)


def evaluate_sums(a, c, impl=None):
    """(sinr_dl, gamma_u, sinr_obs) for mode vector ``a`` and contributions ``c``."""
    impl = impl or _impl
    return impl.evaluate_sums(
        _i8(a), _f(c.amp_dl), _f(c.den_dl), _f(c.amp_jam), _f(c.den_jam),
        _f(c.amp_obs), _f(c.den_obs), _f(c.beta_ap),
        _f(c.base_dl), _f(c.base_gamma), _f(c.rho_u),
        float(c.eta_rho_d), float(c.cross_scale), float(c.jam_coherent),
    )


def scan_candidates(a, c, mon_in, dl_out, cross_total, impl=None):
    """Per-candidate (min MSP, min SE) for moving one downlink AP to monitoring."""
    impl = impl or _impl
    return impl.scan_candidates(
        _i8(a), _f(c.amp_dl), _f(c.den_dl), _f(c.amp_jam), _f(c.den_jam),
        _f(c.amp_obs), _f(c.den_obs),
        _f(c.base_dl), _f(c.base_gamma), _f(c.rho_u), _f(c.beta_pair),
        _f(mon_in), _f(dl_out), float(cross_total),
        float(c.eta_rho_d), float(c.cross_scale), float(c.jam_coherent), float(c.se_prefactor),
    )
