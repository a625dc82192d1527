import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jcam import _pykernels, kernels
from jcam.config import SystemConfig
from jcam.grouping import ModeAssignment, RoleMasks, build_groups, groups_from_masks, role_masks
from jcam.perf import (
    closed_form_terms,
    contributions,
    evaluate,
    evaluate_contrib,
    msp,
    se_downlink_user,
    se_from_sinr,
    sinr_downlink_user,
    sinr_observation,
    untrusted_rx_denominator,
)
from jcam.scenario import make_drop, with_gammas


def _masks(M, K, U, D=False, J=False, O=False):
    return RoleMasks(
        D=np.full((M, K), D), J=np.full((M, U), J), O=np.full((M, U), O)
    )


# scalar formulas ------------------------------------------------------------


@pytest.mark.parametrize(
    "sinr, T, tau, expected", [(0.0, 200, 20, 0.0), (1.0, 200, 100, 0.5), (3.0, 200, 20, 1.8)]
)
def test_se_values(sinr, T, tau, expected):
    assert se_from_sinr(sinr, T, tau) == pytest.approx(expected)


def test_msp_zero_and_half():
    assert msp(0.0, 2.0, 1.0, 1.0) == 0.0
    # sinr * gamma / (rho * beta) = ln 2
    assert msp(math.log(2) * 3.0 / 2.0, 2.0, 1.5, 2.0) == pytest.approx(0.5)


@pytest.mark.parametrize("args", [(1.0, 1.0, 1.0, 0.0), (1.0, 1.0, 0.0, 1.0), (-1.0, 1.0, 1.0, 1.0)])
def test_msp_domain(args):
    with pytest.raises(ValueError):
        msp(*args)


@given(
    s=st.floats(1e-3, 1e3), g=st.floats(1e-3, 1e3), r=st.floats(1e-3, 1e3), b=st.floats(1e-3, 1e3)
)
def test_msp_monotone(s, g, r, b):
    p = msp(s, g, r, b)
    assert 0.0 <= p <= 1.0
    if p < 1.0 - 1e-9:
        assert msp(s * 1.1, g, r, b) > p
        assert msp(s, g * 1.1, r, b) > p
        assert msp(s, g, r, b * 1.1) < p


# worked single-AP cases ----------------------------------------------------


@pytest.mark.parametrize("formula", ["printed", "corrected"])
def test_single_ap_mr_downlink(formula):
    cfg = SystemConfig(M=1, N=4, K=1, U=0, formula=formula)
    ls = with_gammas(
        cfg, beta_dl=[[2e-12]], beta_jam=np.zeros((1, 0)), beta_obs=np.zeros((1, 0)),
        beta_ap=[[0.0]], beta_pair=np.zeros(0), beta_utx_user=np.zeros((0, 1)),
    )
    a = ModeAssignment.all_downlink(1)
    g = groups_from_masks(_masks(1, 1, 0), a)
    gamma = ls.gamma_dl[0, 0]
    expected = cfg.rho_d * cfg.N * gamma / (cfg.rho_d * 2e-12 + 1)
    assert sinr_downlink_user(0, ls, g, a, cfg) == pytest.approx(expected, rel=1e-12)
    assert se_downlink_user(0, ls, g, a, cfg) == pytest.approx(
        cfg.se_prefactor * math.log2(1 + expected)
    )


def _single_obs_state(cfg):
    return with_gammas(
        cfg, beta_dl=np.zeros((1, 0)), beta_jam=[[1e-12]], beta_obs=[[3e-12]],
        beta_ap=[[0.0]], beta_pair=[1e-10], beta_utx_user=np.zeros((1, 0)),
    )


def test_single_ap_mr_observation_printed():
    cfg = SystemConfig(M=1, N=4, K=0, U=1, formula="printed")
    ls = _single_obs_state(cfg)
    a = ModeAssignment(np.zeros(1, dtype=np.int8))
    g = groups_from_masks(_masks(1, 0, 1), a)
    rho, beta, gamma = cfg.rho_u[0], 3e-12, ls.gamma_obs[0, 0]
    expected = rho * cfg.N * gamma / (rho * (beta - gamma) + 1)
    assert sinr_observation(0, ls, g, a, cfg) == pytest.approx(expected, rel=1e-12)


def test_single_ap_mr_observation_corrected():
    # an MR combiner sees the full channel variance beta as beamforming uncertainty
    cfg = SystemConfig(M=1, N=4, K=0, U=1)
    ls = _single_obs_state(cfg)
    a = ModeAssignment(np.zeros(1, dtype=np.int8))
    g = groups_from_masks(_masks(1, 0, 1), a)
    rho, beta, gamma = cfg.rho_u[0], 3e-12, ls.gamma_obs[0, 0]
    expected = rho * cfg.N * gamma / (rho * beta + 1)
    assert sinr_observation(0, ls, g, a, cfg) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("formula", ["printed", "corrected"])
def test_gamma_noise_only_without_downlink(formula):
    cfg = SystemConfig(M=1, N=4, K=0, U=1, formula=formula)
    ls = _single_obs_state(cfg)
    a = ModeAssignment(np.zeros(1, dtype=np.int8))
    g = groups_from_masks(role_masks(ls, cfg), a)
    assert untrusted_rx_denominator(0, ls, g, a, cfg) == 1.0


# drops ---------------------------------------------------------------------


@pytest.fixture(scope="module")
def drop():
    cfg = SystemConfig(M=10, N=6, K=4, U=3)
    return cfg, make_drop(cfg, 8)[1]


@pytest.mark.parametrize("formula", ["printed", "corrected"])
def test_adding_downlink_ap_raises_gamma(drop, formula):
    cfg, ls = drop
    a0 = ModeAssignment.from_monitoring(cfg.M, [0, 1, 2, 3, 4])
    a1 = ModeAssignment.from_monitoring(cfg.M, [1, 2, 3, 4])
    r0 = evaluate(ls, None, a0, cfg, formula)
    r1 = evaluate(ls, None, a1, cfg, formula)
    assert np.all(r1.gamma_u_denom > r0.gamma_u_denom)


def test_all_downlink_gives_zero_msp(drop):
    cfg, ls = drop
    r = evaluate(ls, None, ModeAssignment.all_downlink(cfg.M), cfg)
    assert r.min_msp == 0.0
    np.testing.assert_array_equal(r.sinr_obs, 0.0)


def test_all_monitoring_gives_zero_downlink(drop):
    cfg, ls = drop
    r = evaluate(ls, None, ModeAssignment(np.zeros(cfg.M, dtype=np.int8)), cfg)
    np.testing.assert_array_equal(r.sinr_dl, 0.0)


def test_empty_user_set_gives_infinite_min_se():
    cfg = SystemConfig(M=4, N=4, K=0, U=2)
    _, ls = make_drop(cfg, 1)
    r = evaluate(ls, None, ModeAssignment.from_monitoring(4, [0, 1]), cfg)
    assert r.min_se == math.inf


def test_groups_argument_matches_recomputed(drop):
    cfg, ls = drop
    a = ModeAssignment.from_monitoring(cfg.M, [2, 5, 7])
    r1 = evaluate(ls, build_groups(ls, a, cfg), a, cfg)
    r2 = evaluate(ls, None, a, cfg)
    np.testing.assert_array_equal(r1.msp, r2.msp)


@pytest.mark.parametrize("formula", ["printed", "corrected"])
def test_term_breakdown_matches_evaluate(drop, formula):
    cfg, ls = drop
    a = ModeAssignment.from_monitoring(cfg.M, [0, 3, 6, 9])
    g = build_groups(ls, a, cfg)
    terms = closed_form_terms(ls, g, cfg, formula)
    r = evaluate(ls, g, a, cfg, formula)
    np.testing.assert_allclose(terms["dl"]["SINR"], r.sinr_dl, rtol=1e-12)
    np.testing.assert_allclose(terms["urx"]["Gamma"], r.gamma_u_denom, rtol=1e-12)
    np.testing.assert_allclose(terms["obs"]["SINR"], r.sinr_obs, rtol=1e-12)
    np.testing.assert_array_equal(terms["obs"]["noise"], 4.0)


def test_formulas_agree_without_strong_sets(drop):
    # with pure MR and no AP-to-AP leakage the two formula sets differ only
    # by the coherent jamming term at the untrusted receiver
    cfg, ls = drop
    cfg = cfg.replace(grouping_threshold=0.9999)
    a = ModeAssignment.all_downlink(cfg.M)
    rp = evaluate(ls, None, a, cfg, "printed")
    rc = evaluate(ls, None, a, cfg, "corrected")
    np.testing.assert_allclose(rp.sinr_dl, rc.sinr_dl, rtol=1e-12)
    assert np.all(rc.gamma_u_denom > rp.gamma_u_denom)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), bits=st.lists(st.integers(0, 1), min_size=7, max_size=7))
def test_report_invariants(seed, bits):
    cfg = SystemConfig(M=7, N=4, K=3, U=2)
    _, ls = make_drop(cfg, seed)
    r = evaluate(ls, None, ModeAssignment(np.array(bits, dtype=np.int8)), cfg)
    assert np.all(r.sinr_dl >= 0) and np.all(r.sinr_obs >= 0)
    assert np.all((r.msp >= 0) & (r.msp <= 1))
    assert r.min_se == r.se_dl.min() and r.min_msp == r.msp.min()
    np.testing.assert_allclose(r.se_dl, cfg.se_prefactor * np.log2(1 + r.sinr_dl))
    assert np.all(r.se_dl <= np.log2(1 + r.sinr_dl))


def test_evaluate_is_pure(drop):
    cfg, ls = drop
    a = ModeAssignment.from_monitoring(cfg.M, [1, 4])
    r1, r2 = evaluate(ls, None, a, cfg), evaluate(ls, None, a, cfg)
    np.testing.assert_array_equal(r1.msp, r2.msp)


def test_unknown_formula(drop):
    cfg, ls = drop
    with pytest.raises(ValueError):
        contributions(ls, role_masks(ls, cfg), cfg, "other")


# kernels -------------------------------------------------------------------

IMPLS = [_pykernels]
if kernels.BACKEND == "cython":
    from jcam import _ckernels

    IMPLS.append(_ckernels)


@pytest.mark.parametrize("impl", IMPLS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
@pytest.mark.parametrize("formula", ["printed", "corrected"])
@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 1000), bits=st.lists(st.integers(0, 1), min_size=9, max_size=9))
def test_scan_matches_direct_evaluation(impl, formula, seed, bits):
    cfg = SystemConfig(M=9, N=4, K=3, U=2)
    _, ls = make_drop(cfg, seed)
    c = contributions(ls, role_masks(ls, cfg), cfg, formula)
    a = np.array(bits, dtype=np.int8)
    mo = a == 0
    mon_in = ls.beta_ap[mo].sum(axis=0)
    dl_out = ls.beta_ap[:, ~mo].sum(axis=1)
    cross = ls.beta_ap[np.ix_(mo, ~mo)].sum()
    pi, xi = kernels.scan_candidates(a, c, mon_in, dl_out, cross, impl=impl)
    for m in range(cfg.M):
        if a[m] == 0:
            assert np.isnan(pi[m]) and np.isnan(xi[m])
            continue
        trial = a.copy()
        trial[m] = 0
        r = evaluate_contrib(c, trial, cfg)
        assert pi[m] == pytest.approx(r.min_msp, rel=1e-9, abs=1e-300)
        assert xi[m] == pytest.approx(r.min_se, rel=1e-9, abs=1e-12)


@pytest.mark.skipif(len(IMPLS) < 2, reason="compiled kernels not built")
def test_backends_agree(drop):
    cfg, ls = drop
    c = contributions(ls, role_masks(ls, cfg), cfg)
    a = np.array([1, 0, 1, 1, 0, 0, 1, 1, 0, 1], dtype=np.int8)
    out_py = kernels.evaluate_sums(a, c, impl=IMPLS[0])
    out_c = kernels.evaluate_sums(a, c, impl=IMPLS[1])
    for x, y in zip(out_py, out_c):
        np.testing.assert_allclose(x, y, rtol=1e-12)


def test_env_forces_python_backend():
    import os
    import subprocess
    import sys

    env = dict(os.environ, JCAM_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import jcam.kernels as k; print(k.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
