"""MMSE channel-estimation quality."""

from __future__ import annotations

import numpy as np


def mmse_quality(beta, tau, rho_pilot):
    """Variance of the MMSE estimate of a ``CN(0, beta)`` channel.

    With orthogonal pilots of length ``tau`` sent at normalized power
    ``rho_pilot`` the estimate has variance ``tau*rho*beta**2 / (tau*rho*beta + 1)``.
    Broadcasts over array inputs.
    """
    beta = np.asarray(beta, dtype=float)
    rho_pilot = np.asarray(rho_pilot, dtype=float)
    if np.any(beta < 0):
        raise ValueError("beta must be >= 0")
    if np.any(np.asarray(tau) < 1):
        raise ValueError("tau must be >= 1")
    if np.any(rho_pilot <= 0):
        raise ValueError("rho_pilot must be > 0")
    snr = tau * rho_pilot * beta
    gamma = snr * beta / (snr + 1.0)
    return gamma if gamma.ndim else float(gamma)


def mmse_gain(beta, tau, rho_pilot):
    """Scalar MMSE filter ``tau*rho*beta / (tau*rho*beta + 1)`` applied to the
    de-spread pilot observation ``g + n / sqrt(tau*rho)``."""
    snr = tau * np.asarray(rho_pilot, dtype=float) * np.asarray(beta, dtype=float)
    return snr / (snr + 1.0)
