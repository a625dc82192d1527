import numpy as np
import pytest

from jcam.config import SystemConfig
from jcam.scenario import (
    SHADOW_STD_DB,
    Layout,
    build_large_scale,
    correlated_shadowing,
    covariance_factor,
    derive_seeds,
    make_drop,
    path_loss_db,
    place_nodes,
    shadowing_covariance,
)


@pytest.mark.parametrize("d, expected", [(1.0, -30.5), (10.0, -67.2), (100.0, -103.9)])
def test_path_loss_values(d, expected):
    assert path_loss_db(d) == pytest.approx(expected, abs=1e-12)


def test_path_loss_domain():
    with pytest.raises(ValueError):
        path_loss_db(0.0)


def test_beta_at_100m_without_shadowing():
    assert 10 ** (path_loss_db(100.0) / 10) == pytest.approx(4.07e-11, rel=2e-3)


def test_path_loss_monotone():
    d = np.linspace(1, 2000, 500)
    assert np.all(np.diff(path_loss_db(d)) < 0)


def test_positions_inside_area_and_deterministic():
    cfg = SystemConfig(M=30, N=4, K=5, U=3)
    a = place_nodes(cfg, 11)
    b = place_nodes(cfg, 11)
    for name in ("ap_xy", "user_xy", "urx_xy", "utx_xy"):
        xy = getattr(a, name)
        assert np.all((xy >= 0) & (xy <= 1000))
        np.testing.assert_array_equal(xy, getattr(b, name))


def test_user_positions_independent_of_ap_count():
    a = place_nodes(SystemConfig(M=5, N=4, K=3, U=2), 3)
    b = place_nodes(SystemConfig(M=50, N=4, K=3, U=2), 3)
    np.testing.assert_array_equal(a.user_xy, b.user_xy)
    np.testing.assert_array_equal(a.utx_xy, b.utx_xy)


def test_distance_clamped():
    lay = Layout(np.zeros((1, 2)), np.zeros((1, 2)), np.zeros((0, 2)), np.zeros((0, 2)), 1000.0, 5.0)
    assert lay.distance(lay.ap_xy, lay.user_xy)[0, 0] == 5.0


def test_derive_seeds_stable():
    assert derive_seeds(1, 3) == derive_seeds(1, 3)
    assert len(set(derive_seeds(1, 3))) == 3
    assert derive_seeds(1, 2) != derive_seeds(2, 2)


def _two_node_layout(sep):
    users = np.array([[100.0, 100.0], [100.0 + sep, 100.0]])
    return Layout(np.zeros((1, 2)), users, np.zeros((0, 2)), np.zeros((0, 2)), 1000.0, 5.0)


def test_covariance_values():
    cov = shadowing_covariance(_two_node_layout(0.0))
    assert cov[0, 0] == pytest.approx(16.0)
    assert cov[0, 1] == pytest.approx(16.0 * 2 ** (-5.0 / 9.0))


def test_covariance_factor_clips_negative_eigenvalues():
    cov = np.array([[1.0, 1.0 + 1e-9], [1.0 + 1e-9, 1.0]])
    L = covariance_factor(cov)
    assert np.all(np.isfinite(L))
    np.testing.assert_allclose(L @ L.T, cov, atol=1e-8)


def test_shadowing_statistics_colocated_pair():
    # co-located nodes: marginal variance 16 and covariance 16 * 2^(-d_min/9)
    F = correlated_shadowing(_two_node_layout(0.0), seed=5, n_ap=100_000)
    cov = np.cov(F.T)
    assert abs(F.mean()) < 0.2
    assert abs(cov[0, 0] - 16.0) < 0.5
    assert abs(cov[0, 1] - 16.0 * 2 ** (-5.0 / 9.0)) < 0.5


def test_shadowing_rows_independent_across_aps():
    lay = Layout(np.zeros((2, 2)), np.array([[10.0, 10.0]]), np.zeros((0, 2)), np.zeros((0, 2)),
                 1000.0, 5.0)
    F = np.concatenate([correlated_shadowing(lay, seed=s) for s in range(50_000)], axis=1)
    assert abs(np.cov(F)[0, 1]) < 0.5
    assert abs(F.var() - SHADOW_STD_DB**2) < 1.0


def test_large_scale_invariants():
    cfg = SystemConfig(M=10, N=4, K=3, U=2)
    _, ls = make_drop(cfg, 4)
    assert ls.beta_dl.shape == (10, 3)
    assert ls.beta_jam.shape == ls.beta_obs.shape == (10, 2)
    assert ls.beta_ap.shape == (10, 10)
    assert ls.beta_pair.shape == (2,)
    assert ls.beta_utx_user.shape == (2, 3)
    for name in ("dl", "jam", "obs"):
        beta, gamma = getattr(ls, "beta_" + name), getattr(ls, "gamma_" + name)
        assert np.all(beta > 0)
        assert np.all((gamma > 0) & (gamma <= beta))
    np.testing.assert_array_equal(ls.beta_ap, ls.beta_ap.T)
    assert np.all(np.diag(ls.beta_ap) == 0)


def test_make_drop_bit_identical():
    cfg = SystemConfig(M=6, N=4, K=2, U=2)
    _, a = make_drop(cfg, 99)
    _, b = make_drop(cfg, 99)
    for name in a.__dataclass_fields__:
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))


def test_no_shadowing_beta_decreases_with_distance():
    cfg = SystemConfig(M=1, N=4, K=3, U=0)
    users = np.array([[10.0, 0.0], [100.0, 0.0], [500.0, 0.0]])
    lay = Layout(np.zeros((1, 2)), users, np.zeros((0, 2)), np.zeros((0, 2)), 1000.0, 5.0)
    beta = 10 ** (path_loss_db(lay.distance(lay.ap_xy, lay.user_xy)) / 10)
    assert np.all(np.diff(beta[0]) < 0)
    # shadowing multiplies that profile by a log-normal factor with median 1
    ls = build_large_scale(lay, cfg, 1)
    assert ls.beta_dl.shape == (1, 3)
