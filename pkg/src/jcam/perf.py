"""Closed-form downlink SE, untrusted-link interference, observation SINR and
monitoring success probability.

Every closed form here is a sum of per-AP contributions (plus squared sums of
per-AP coherent amplitudes), which is what lets the greedy search update a
candidate in O(K + U).  Two formula sets are available:

``"printed"``
    The expressions exactly as published.
``"corrected"`` (default)
    The use-and-then-forget expectations recomputed from the channel model.
    They differ from the printed ones in three places: the zero-forcing
    gain ``gamma`` is subtracted only where the receiver itself belongs to the
    AP's strong set; the untrusted receiver's interference includes the
    coherent gain of the jamming beam aimed at it; and the AP-to-AP leakage
    at monitoring APs is scaled by the full AP power ``rho_d`` rather than
    ``eta * rho_d``.  ``jcam.mc`` measures both sets against simulation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .config import SystemConfig
from .grouping import GroupingState, ModeAssignment, RoleMasks, groups_from_masks, role_masks
from .scenario import LargeScaleState


@dataclass(frozen=True)
class Contributions:
    """Per-AP additive pieces of every closed form, for one drop.

    Downlink-role arrays apply when the AP is in downlink mode, ``*_obs``
    arrays when it monitors.
    """

    amp_dl: np.ndarray  # (M, K) coherent amplitude toward user k
    den_dl: np.ndarray  # (M, K) interference power at user k
    amp_jam: np.ndarray  # (M, U)
    den_jam: np.ndarray  # (M, U)
    amp_obs: np.ndarray  # (M, U)
    den_obs: np.ndarray  # (M, U) includes the AP's unit noise
    beta_ap: np.ndarray  # (M, M)
    base_dl: np.ndarray  # (K,) untrusted-transmitter interference + noise
    base_gamma: np.ndarray  # (U,) other untrusted pairs + noise
    rho_u: np.ndarray
    beta_pair: np.ndarray
    eta_rho_d: float
    cross_scale: float
    jam_coherent: float
    se_prefactor: float


def _pzf_amplitude(strong, n_strong, gamma, N):
    eff = np.where(strong, N - n_strong[:, None], N)
    return np.sqrt(eff * gamma)


def contributions(
    ls: LargeScaleState, masks: RoleMasks, config: SystemConfig, formula: str | None = None
) -> Contributions:
    formula = formula or config.formula
    if formula not in ("corrected", "printed"):
        raise ValueError(f"unknown formula {formula!r}")
    corrected = formula == "corrected"
    N, K, U = config.N, config.K, config.U
    eta_rho_d = config.eta * config.rho_d
    rho_u = config.rho_u

    nD = masks.D.sum(axis=1)
    nJ = masks.J.sum(axis=1)
    # printed: subtract |S_m| * gamma at every AP; corrected: only where the
    # receiver is itself zero-forced at that AP
    sub_dl = nD[:, None] * ls.gamma_dl
    sub_jam = nJ[:, None] * ls.gamma_jam
    if corrected:
        sub_dl = np.where(masks.D, sub_dl, 0.0)
        sub_jam = np.where(masks.J, sub_jam, 0.0)

    rg = ls.gamma_obs * rho_u[None, :]
    if corrected:
        strong_sum = (rg * masks.O).sum(axis=1, keepdims=True)
        sub_obs = np.where(masks.O, strong_sum, 0.0)
    else:
        sub_obs = np.where(masks.O, 0.0, rg.sum(axis=1, keepdims=True))
    rb_obs = (ls.beta_obs * rho_u[None, :]).sum(axis=1, keepdims=True)

    rb_pair = rho_u * ls.beta_pair
    return Contributions(
        amp_dl=_pzf_amplitude(masks.D, nD, ls.gamma_dl, N),
        den_dl=eta_rho_d * ((K + U) * ls.beta_dl - sub_dl),
        amp_jam=_pzf_amplitude(masks.J, nJ, ls.gamma_jam, N),
        den_jam=eta_rho_d * ((K + U) * ls.beta_jam - sub_jam),
        amp_obs=_pzf_amplitude(masks.O, masks.O.sum(axis=1), ls.gamma_obs, N),
        den_obs=np.broadcast_to(rb_obs, (ls.M, U)) - sub_obs + 1.0,
        beta_ap=ls.beta_ap,
        base_dl=(rho_u[:, None] * ls.beta_utx_user).sum(axis=0) + 1.0,
        base_gamma=rb_pair.sum() - rb_pair + 1.0,
        rho_u=rho_u,
        beta_pair=ls.beta_pair,
        eta_rho_d=eta_rho_d,
        cross_scale=config.rho_d if corrected else eta_rho_d,
        jam_coherent=1.0 if corrected else 0.0,
        se_prefactor=config.se_prefactor,
    )


@dataclass(frozen=True)
class PerformanceReport:
    sinr_dl: np.ndarray
    se_dl: np.ndarray
    gamma_u_denom: np.ndarray
    sinr_obs: np.ndarray
    msp: np.ndarray

    @property
    def min_se(self) -> float:
        return float(self.se_dl.min()) if self.se_dl.size else float("inf")

    @property
    def min_msp(self) -> float:
        return float(self.msp.min()) if self.msp.size else float("inf")


def se_from_sinr(sinr, T: int, tau: int):
    """Spectral efficiency ``(T - tau)/T * log2(1 + sinr)`` in bit/s/Hz."""
    return (T - tau) / T * np.log2(1.0 + np.asarray(sinr, dtype=float))


def msp(sinr_obs, gamma_u, rho_u, beta_pair_u):
    """Probability that the observation SINR beats the untrusted link's SINR,
    whose fading power ``|g|^2`` is exponential with mean ``beta_pair_u``."""
    beta_pair_u = np.asarray(beta_pair_u, dtype=float)
    rho_u = np.asarray(rho_u, dtype=float)
    if np.any(beta_pair_u <= 0) or np.any(rho_u <= 0):
        raise ValueError("rho_u and beta_pair_u must be > 0")
    if np.any(np.asarray(sinr_obs) < 0) or np.any(np.asarray(gamma_u) < 0):
        raise ValueError("sinr_obs and gamma_u must be >= 0")
    p = -np.expm1(-np.asarray(sinr_obs) * gamma_u / (rho_u * beta_pair_u))
    return p if p.ndim else float(p)


def report_from_sums(c: Contributions, sinr_dl, gamma_u, sinr_obs, T, tau) -> PerformanceReport:
    return PerformanceReport(
        sinr_dl=sinr_dl,
        se_dl=se_from_sinr(sinr_dl, T, tau),
        gamma_u_denom=gamma_u,
        sinr_obs=sinr_obs,
        msp=msp(sinr_obs, gamma_u, c.rho_u, c.beta_pair) if len(gamma_u) else np.zeros(0),
    )


def evaluate_contrib(c: Contributions, a, config: SystemConfig) -> PerformanceReport:
    a = np.ascontiguousarray(np.asarray(getattr(a, "a", a)), dtype=np.int8)
    sinr_dl, gamma_u, sinr_obs = kernels.evaluate_sums(a, c)
    return report_from_sums(c, sinr_dl, gamma_u, sinr_obs, config.T, config.tau)


def evaluate(
    ls: LargeScaleState,
    groups: GroupingState | None,
    a: ModeAssignment,
    config: SystemConfig,
    formula: str | None = None,
) -> PerformanceReport:
    """Closed-form performance of assignment ``a``.

    ``groups`` only has to be consistent with ``a``; the per-role strong sets
    are recomputed from ``ls`` when it is ``None``.
    """
    if groups is None:
        masks = role_masks(ls, config)
    else:
        masks = _masks_from_groups(groups)
    return evaluate_contrib(contributions(ls, masks, config, formula), a, config)


def _masks_from_groups(groups: GroupingState) -> RoleMasks:
    # grouping state only stores the active role per AP; inactive rows are
    # never read by the kernels so leaving them empty is harmless
    return RoleMasks(D=groups.S_D, J=groups.S_J, O=groups.S_O)


# individual closed forms -----------------------------------------------------


def sinr_downlink_user(k, ls, groups, a, config, formula=None) -> float:
    return float(evaluate(ls, groups, a, config, formula).sinr_dl[k])


def se_downlink_user(k, ls, groups, a, config, formula=None) -> float:
    return float(evaluate(ls, groups, a, config, formula).se_dl[k])


def untrusted_rx_denominator(u, ls, groups, a, config, formula=None) -> float:
    return float(evaluate(ls, groups, a, config, formula).gamma_u_denom[u])


def sinr_observation(u, ls, groups, a, config, formula=None) -> float:
    return float(evaluate(ls, groups, a, config, formula).sinr_obs[u])


# term breakdown ----------------------------------------------------------------


def closed_form_terms(
    ls: LargeScaleState, groups: GroupingState, config: SystemConfig, formula: str | None = None
) -> dict[str, dict[str, np.ndarray]]:
    """Every denominator term of the three SINRs, per receiver.

    Keys: ``"dl"`` (DS2, BU_DI, JI, UI, noise, SINR), ``"urx"`` (UI, JI, DI,
    noise, Gamma) and ``"obs"`` (DS2, BU_UI, AP_cross, noise, SINR).
    """
    masks = _masks_from_groups(groups)
    c = contributions(ls, masks, config, formula)
    a = groups.a
    dl = a == 1
    mo = ~dl
    K, U = config.K, config.U
    erd = c.eta_rho_d

    ds2 = erd * c.amp_dl[dl].sum(axis=0) ** 2
    # den_dl = erd * ((K+U) beta - sub); the U jamming beams see plain beta
    ji_dl = erd * U * ls.beta_dl[dl].sum(axis=0)
    bu_di = c.den_dl[dl].sum(axis=0) - ji_dl
    ui_dl = c.base_dl - 1.0
    dl_terms = dict(DS2=ds2, BU_DI=bu_di, JI=ji_dl, UI=ui_dl, noise=np.ones(K))
    dl_terms["SINR"] = _ratio(ds2, bu_di + ji_dl + ui_dl + 1.0)

    di_u = erd * K * ls.beta_jam[dl].sum(axis=0)
    ji_u = c.den_jam[dl].sum(axis=0) - di_u + c.jam_coherent * erd * c.amp_jam[dl].sum(axis=0) ** 2
    ui_u = c.base_gamma - 1.0
    urx_terms = dict(UI=ui_u, JI=ji_u, DI=di_u, noise=np.ones(U))
    urx_terms["Gamma"] = ui_u + ji_u + di_u + 1.0

    ds2_o = c.rho_u * c.amp_obs[mo].sum(axis=0) ** 2
    n_mo = float(mo.sum())
    bu_ui = c.den_obs[mo].sum(axis=0) - n_mo
    cross = np.full(U, c.cross_scale * ls.beta_ap[np.ix_(mo, dl)].sum())
    obs_terms = dict(DS2=ds2_o, BU_UI=bu_ui, AP_cross=cross, noise=np.full(U, n_mo))
    obs_terms["SINR"] = _ratio(ds2_o, bu_ui + cross + n_mo)
    return {"dl": dl_terms, "urx": urx_terms, "obs": obs_terms}


def _ratio(num, den):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    out = np.zeros(np.broadcast(num, den).shape)
    np.divide(num, den, out=out, where=den > 0)
    return out
