"""NumPy implementations of the closed-form hot loops.

Same contract as the compiled ``_ckernels`` module; used when the extension
is not built.
"""

import numpy as np


def evaluate_sums(
    a, amp_dl, den_dl, amp_jam, den_jam, amp_obs, den_obs, beta_ap,
    base_dl, base_gamma, rho_u, eta_rho_d, cross_scale, jam_coherent,
):
    dl = a == 1
    mo = ~dl
    num_dl = eta_rho_d * amp_dl[dl].sum(axis=0) ** 2
    sinr_dl = num_dl / (den_dl[dl].sum(axis=0) + base_dl)

    gamma_u = (
        base_gamma
        + den_jam[dl].sum(axis=0)
        + jam_coherent * eta_rho_d * amp_jam[dl].sum(axis=0) ** 2
    )

    cross = cross_scale * beta_ap[np.ix_(mo, dl)].sum()
    num_obs = rho_u * amp_obs[mo].sum(axis=0) ** 2
    den_o = den_obs[mo].sum(axis=0) + cross
    sinr_obs = np.zeros_like(num_obs)
    np.divide(num_obs, den_o, out=sinr_obs, where=den_o > 0)
    return sinr_dl, gamma_u, sinr_obs


def scan_candidates(
    a, amp_dl, den_dl, amp_jam, den_jam, amp_obs, den_obs,
    base_dl, base_gamma, rho_u, beta_pair, mon_in, dl_out, cross_total,
    eta_rho_d, cross_scale, jam_coherent, se_prefactor,
):
    """Min MSP and min SE if each downlink AP alone switched to monitoring.

    ``mon_in[c]`` is the AP-to-AP gain from ``c`` into current monitoring
    APs, ``dl_out[c]`` the gain from current downlink APs into ``c``, and
    ``cross_total`` their double sum over the current split.  Entries for
    APs already monitoring are NaN.
    """
    M = a.shape[0]
    pi = np.full(M, np.nan)
    xi = np.full(M, np.nan)
    dl = a == 1
    cand = np.flatnonzero(dl)
    if cand.size == 0:
        return pi, xi
    mo = ~dl

    amp = amp_dl[dl].sum(axis=0) - amp_dl[cand]
    den = den_dl[dl].sum(axis=0) - den_dl[cand] + base_dl
    sinr_dl = eta_rho_d * amp**2 / den
    if sinr_dl.shape[1]:
        xi[cand] = se_prefactor * np.log2(1.0 + sinr_dl.min(axis=1))
    else:
        xi[cand] = np.inf

    if amp_jam.shape[1] == 0:
        pi[cand] = np.inf
        return pi, xi
    amp_j = amp_jam[dl].sum(axis=0) - amp_jam[cand]
    gamma_u = (
        base_gamma
        + den_jam[dl].sum(axis=0) - den_jam[cand]
        + jam_coherent * eta_rho_d * amp_j**2
    )
    cross = cross_scale * (cross_total - mon_in[cand] + dl_out[cand])
    num_o = rho_u * (amp_obs[mo].sum(axis=0) + amp_obs[cand]) ** 2
    den_o = den_obs[mo].sum(axis=0) + den_obs[cand] + cross[:, None]
    sinr_obs = num_o / den_o
    msp = -np.expm1(-sinr_obs * gamma_u / (rho_u * beta_pair))
    pi[cand] = msp.min(axis=1)
    return pi, xi
