"""Network drops: node placement, path loss, correlated shadowing, and the
large-scale fading state every other module consumes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .estimation import mmse_quality

SHADOW_STD_DB = 4.0
SHADOW_DECORR_M = 9.0


@dataclass(frozen=True)
class Layout:
    """Planar node positions in meters."""

    ap_xy: np.ndarray  # (M, 2)
    user_xy: np.ndarray  # (K, 2)
    urx_xy: np.ndarray  # (U, 2) untrusted receivers
    utx_xy: np.ndarray  # (U, 2) untrusted transmitters
    area_side_m: float
    d_min_m: float

    def distance(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Pairwise distances between two point sets, clamped below at ``d_min_m``."""
        a = np.asarray(a, dtype=float).reshape(-1, 2)
        b = np.asarray(b, dtype=float).reshape(-1, 2)
        d = np.hypot(a[:, None, 0] - b[None, :, 0], a[:, None, 1] - b[None, :, 1])
        return np.maximum(d, self.d_min_m)

    @property
    def user_side_xy(self) -> np.ndarray:
        """Users, untrusted receivers, untrusted transmitters, in that order."""
        return np.vstack([self.user_xy, self.urx_xy, self.utx_xy])


@dataclass(frozen=True)
class LargeScaleState:
    beta_dl: np.ndarray  # (M, K)
    beta_jam: np.ndarray  # (M, U)
    beta_obs: np.ndarray  # (M, U)
    beta_ap: np.ndarray  # (M, M), zero diagonal
    beta_pair: np.ndarray  # (U,)
    beta_utx_user: np.ndarray  # (U, K)
    gamma_dl: np.ndarray
    gamma_jam: np.ndarray
    gamma_obs: np.ndarray

    @property
    def M(self) -> int:
        return self.beta_dl.shape[0]

    @property
    def K(self) -> int:
        return self.beta_dl.shape[1]

    @property
    def U(self) -> int:
        return self.beta_jam.shape[1]


def path_loss_db(distance_m):
    """Path loss in dB (negative), ``-30.5 - 36.7 log10(d / 1 m)``."""
    d = np.asarray(distance_m, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be > 0")
    pl = -30.5 - 36.7 * np.log10(d)
    return pl if pl.ndim else float(pl)


def derive_seeds(seed, n: int) -> list[int]:
    """``n`` independent integer seeds derived from ``seed``."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n)]


def _child_rngs(seed, n):
    return [np.random.default_rng(s) for s in derive_seeds(seed, n)]


def place_nodes(config: SystemConfig, seed: int) -> Layout:
    """Uniform independent positions in the square area.

    Each node class gets its own RNG stream so user and untrusted-node
    positions do not depend on the AP count.
    """
    side = config.area_side_m
    r_ap, r_user, r_urx, r_utx = _child_rngs(seed, 4)
    return Layout(
        ap_xy=r_ap.uniform(0.0, side, size=(config.M, 2)),
        user_xy=r_user.uniform(0.0, side, size=(config.K, 2)),
        urx_xy=r_urx.uniform(0.0, side, size=(config.U, 2)),
        utx_xy=r_utx.uniform(0.0, side, size=(config.U, 2)),
        area_side_m=side,
        d_min_m=config.d_min_m,
    )


def shadowing_covariance(layout: Layout) -> np.ndarray:
    """Covariance (dB^2) of one AP's shadowing row over the user-side nodes."""
    xy = layout.user_side_xy
    dist = layout.distance(xy, xy)
    np.fill_diagonal(dist, 0.0)
    return SHADOW_STD_DB**2 * 2.0 ** (-dist / SHADOW_DECORR_M)


def covariance_factor(cov: np.ndarray) -> np.ndarray:
    """Symmetric square root via eigendecomposition, negative eigenvalues clipped."""
    w, v = np.linalg.eigh(cov)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


def correlated_shadowing(layout: Layout, seed: int, n_ap: int | None = None) -> np.ndarray:
    """Shadowing in dB, shape ``(M, K + 2U)``; rows (APs) independent,
    columns correlated by inter-node distance."""
    n_ap = layout.ap_xy.shape[0] if n_ap is None else n_ap
    cov = shadowing_covariance(layout)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n_ap, cov.shape[0]))
    return z @ covariance_factor(cov).T


def _db_to_lin(db):
    return 10.0 ** (np.asarray(db) / 10.0)


def build_large_scale(layout: Layout, config: SystemConfig, seed: int) -> LargeScaleState:
    K, U = config.K, config.U
    r_corr, r_ap, r_pair, r_cross = derive_seeds(seed, 4)

    F = correlated_shadowing(layout, r_corr)
    pl = path_loss_db(layout.distance(layout.ap_xy, layout.user_side_xy))
    beta_side = _db_to_lin(pl + F)
    beta_dl = beta_side[:, :K]
    beta_jam = beta_side[:, K : K + U]
    beta_obs = beta_side[:, K + U :]

    M = layout.ap_xy.shape[0]
    rng = np.random.default_rng(r_ap)
    shadow = np.triu(SHADOW_STD_DB * rng.standard_normal((M, M)), 1)
    shadow = shadow + shadow.T
    beta_ap = _db_to_lin(path_loss_db(layout.distance(layout.ap_xy, layout.ap_xy)) + shadow)
    np.fill_diagonal(beta_ap, 0.0)

    rng = np.random.default_rng(r_pair)
    d_pair = np.maximum(np.hypot(*(layout.utx_xy - layout.urx_xy).T), config.d_min_m)
    beta_pair = _db_to_lin(path_loss_db(d_pair) + SHADOW_STD_DB * rng.standard_normal(U))

    rng = np.random.default_rng(r_cross)
    pl_cross = path_loss_db(layout.distance(layout.utx_xy, layout.user_xy))
    beta_utx_user = _db_to_lin(pl_cross + SHADOW_STD_DB * rng.standard_normal((U, K)))

    return with_gammas(
        config,
        beta_dl=beta_dl,
        beta_jam=beta_jam,
        beta_obs=beta_obs,
        beta_ap=beta_ap,
        beta_pair=beta_pair,
        beta_utx_user=beta_utx_user,
    )


def with_gammas(config: SystemConfig, **betas) -> LargeScaleState:
    """Assemble a state from beta matrices, filling the MMSE qualities."""
    rho_u = config.rho_u
    return LargeScaleState(
        **{k: np.ascontiguousarray(v, dtype=float) for k, v in betas.items()},
        gamma_dl=mmse_quality(betas["beta_dl"], config.tau, config.rho_pilot_user),
        gamma_jam=mmse_quality(betas["beta_jam"], config.tau, rho_u[None, :]),
        gamma_obs=mmse_quality(betas["beta_obs"], config.tau, rho_u[None, :]),
    )


def make_drop(config: SystemConfig, seed: int) -> tuple[Layout, LargeScaleState]:
    """One drop: positions from ``seed``, shadowing from a derived stream."""
    s_layout, s_fading = derive_seeds(seed, 2)
    layout = place_nodes(config, s_layout)
    return layout, build_large_scale(layout, config, s_fading)
