# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled closed-form hot loops (see ``_pykernels`` for the reference)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport expm1, log2, INFINITY, NAN

cnp.import_array()


def evaluate_sums(
    const signed char[::1] a,
    const double[:, ::1] amp_dl, const double[:, ::1] den_dl,
    const double[:, ::1] amp_jam, const double[:, ::1] den_jam,
    const double[:, ::1] amp_obs, const double[:, ::1] den_obs,
    const double[:, ::1] beta_ap,
    const double[::1] base_dl, const double[::1] base_gamma, const double[::1] rho_u,
    double eta_rho_d, double cross_scale, double jam_coherent,
):
    cdef Py_ssize_t M = a.shape[0], K = amp_dl.shape[1], U = amp_jam.shape[1]
    cdef Py_ssize_t m, i, k, u
    cdef double cross = 0.0, s_amp, s_den
    sinr_dl_arr = np.zeros(K)
    gamma_arr = np.zeros(U)
    sinr_obs_arr = np.zeros(U)
    cdef double[::1] sinr_dl = sinr_dl_arr, gamma_u = gamma_arr, sinr_obs = sinr_obs_arr

    for k in range(K):
        s_amp = 0.0
        s_den = 0.0
        for m in range(M):
            if a[m] == 1:
                s_amp += amp_dl[m, k]
                s_den += den_dl[m, k]
        sinr_dl[k] = eta_rho_d * s_amp * s_amp / (s_den + base_dl[k])

    for u in range(U):
        s_amp = 0.0
        s_den = 0.0
        for m in range(M):
            if a[m] == 1:
                s_amp += amp_jam[m, u]
                s_den += den_jam[m, u]
        gamma_u[u] = base_gamma[u] + s_den + jam_coherent * eta_rho_d * s_amp * s_amp

    for m in range(M):
        if a[m] == 0:
            for i in range(M):
                if a[i] == 1:
                    cross += beta_ap[m, i]
    cross *= cross_scale

    for u in range(U):
        s_amp = 0.0
        s_den = 0.0
        for m in range(M):
            if a[m] == 0:
                s_amp += amp_obs[m, u]
                s_den += den_obs[m, u]
        s_den += cross
        if s_den > 0:
            sinr_obs[u] = rho_u[u] * s_amp * s_amp / s_den
    return sinr_dl_arr, gamma_arr, sinr_obs_arr


def scan_candidates(
    const signed char[::1] a,
    const double[:, ::1] amp_dl, const double[:, ::1] den_dl,
    const double[:, ::1] amp_jam, const double[:, ::1] den_jam,
    const double[:, ::1] amp_obs, const double[:, ::1] den_obs,
    const double[::1] base_dl, const double[::1] base_gamma,
    const double[::1] rho_u, const double[::1] beta_pair,
    const double[::1] mon_in, const double[::1] dl_out, double cross_total,
    double eta_rho_d, double cross_scale, double jam_coherent, double se_prefactor,
):
    cdef Py_ssize_t M = a.shape[0], K = amp_dl.shape[1], U = amp_jam.shape[1]
    cdef Py_ssize_t m, c, k, u
    cdef double amp, den, sinr, worst, cross, g, p
    pi_arr = np.full(M, np.nan)
    xi_arr = np.full(M, np.nan)
    cdef double[::1] pi = pi_arr, xi = xi_arr

    # current sums over the split encoded in ``a``
    tot_amp_dl = np.zeros(K)
    tot_den_dl = np.zeros(K)
    tot_amp_jam = np.zeros(U)
    tot_den_jam = np.zeros(U)
    tot_amp_obs = np.zeros(U)
    tot_den_obs = np.zeros(U)
    cdef double[::1] sad = tot_amp_dl, sdd = tot_den_dl
    cdef double[::1] saj = tot_amp_jam, sdj = tot_den_jam
    cdef double[::1] sao = tot_amp_obs, sdo = tot_den_obs
    for m in range(M):
        if a[m] == 1:
            for k in range(K):
                sad[k] += amp_dl[m, k]
                sdd[k] += den_dl[m, k]
            for u in range(U):
                saj[u] += amp_jam[m, u]
                sdj[u] += den_jam[m, u]
        else:
            for u in range(U):
                sao[u] += amp_obs[m, u]
                sdo[u] += den_obs[m, u]

    for c in range(M):
        if a[c] != 1:
            continue
        worst = INFINITY
        for k in range(K):
            amp = sad[k] - amp_dl[c, k]
            den = sdd[k] - den_dl[c, k] + base_dl[k]
            sinr = eta_rho_d * amp * amp / den
            if sinr < worst:
                worst = sinr
        xi[c] = se_prefactor * log2(1.0 + worst) if K > 0 else INFINITY

        if U == 0:
            pi[c] = INFINITY
            continue
        cross = cross_scale * (cross_total - mon_in[c] + dl_out[c])
        worst = INFINITY
        for u in range(U):
            amp = saj[u] - amp_jam[c, u]
            g = base_gamma[u] + sdj[u] - den_jam[c, u] + jam_coherent * eta_rho_d * amp * amp
            amp = sao[u] + amp_obs[c, u]
            sinr = rho_u[u] * amp * amp / (sdo[u] + den_obs[c, u] + cross)
            p = -expm1(-sinr * g / (rho_u[u] * beta_pair[u]))
            if p < worst:
                worst = p
        pi[c] = worst
    return pi_arr, xi_arr
