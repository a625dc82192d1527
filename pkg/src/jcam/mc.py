"""Channel-level Monte Carlo oracle.

Draws Rayleigh channels, MMSE estimates from noisy pilots, builds the
explicit PZF/MR precoders and combiners, and estimates every
use-and-then-forget term by averaging over realizations.  Symbol averages
are taken analytically (unit-power, independent symbols), so each trial is
one draw of channels, pilot noise and receiver noise.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .config import SystemConfig
from .estimation import mmse_gain, mmse_quality
from .grouping import GroupingState
from .perf import closed_form_terms
from .scenario import LargeScaleState, derive_seeds

log = logging.getLogger(__name__)

BATCH = 250
RIDGE = 1e-12


def _cn(rng, shape, var=1.0):
    """Circularly symmetric complex Gaussian samples with variance ``var``."""
    scale = np.sqrt(np.asarray(var, dtype=float) / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@dataclass
class ChannelRealization:
    """Instantaneous channels; leading axis indexes trials."""

    g_dl: np.ndarray  # (B, M, K, N)
    g_jam: np.ndarray  # (B, M, U, N)
    g_obs: np.ndarray  # (B, M, U, N)
    F_ap: np.ndarray  # (B, M, M, N, N); F_ap[:, m, i] is AP i -> AP m
    g_pair: np.ndarray  # (B, U)
    g_utx_user: np.ndarray  # (B, U, K)

    @property
    def trials(self) -> int:
        return self.g_dl.shape[0]


@dataclass
class EstimatedChannels:
    ghat_dl: np.ndarray
    ghat_jam: np.ndarray
    ghat_obs: np.ndarray


@dataclass
class BeamformerSet:
    """Active beamformer of every (AP, target) pair, zero where the AP is in
    the other mode.  Columns are targets: ``b_dl[..., n, k]``."""

    b_dl: np.ndarray | None = None  # (B, M, N, K)
    b_jam: np.ndarray | None = None  # (B, M, N, U)
    v_obs: np.ndarray | None = None  # (B, M, N, U)
    fallbacks: list[tuple[str, int]] = field(default_factory=list)


def draw_smallscale(ls: LargeScaleState, N: int, seed, trials: int = 1,
                    with_ap: bool = True) -> ChannelRealization:
    """i.i.d. Rayleigh channels scaled by ``sqrt(beta)``."""
    rng = np.random.default_rng(seed)
    B, M, K, U = trials, ls.M, ls.K, ls.U
    g_dl = _cn(rng, (B, M, K, N), ls.beta_dl[None, :, :, None])
    g_jam = _cn(rng, (B, M, U, N), ls.beta_jam[None, :, :, None])
    g_obs = _cn(rng, (B, M, U, N), ls.beta_obs[None, :, :, None])
    if with_ap:
        F = _cn(rng, (B, M, M, N, N), ls.beta_ap[None, :, :, None, None])
    else:
        F = np.zeros((B, M, M, 0, 0), dtype=complex)
    g_pair = _cn(rng, (B, U), ls.beta_pair[None, :])
    g_utx_user = _cn(rng, (B, U, K), ls.beta_utx_user[None, :, :])
    return ChannelRealization(g_dl, g_jam, g_obs, F, g_pair, g_utx_user)


def mmse_estimate(real: ChannelRealization, ls: LargeScaleState, config: SystemConfig,
                  seed) -> EstimatedChannels:
    """Scalar MMSE filter on each de-spread pilot observation ``g + n/sqrt(tau*rho)``."""
    rng = np.random.default_rng(seed)
    tau = config.tau
    rho_u = config.rho_u[None, None, :, None]
    rho_k = config.rho_pilot_user

    def est(g, beta, rho):
        noise = _cn(rng, g.shape) / np.sqrt(tau * rho)
        return mmse_gain(beta[None, :, :, None], tau, rho) * (g + noise)

    return EstimatedChannels(
        ghat_dl=est(real.g_dl, ls.beta_dl, rho_k),
        ghat_jam=est(real.g_jam, ls.beta_jam, rho_u),
        ghat_obs=est(real.g_obs, ls.beta_obs, rho_u),
    )


def _beamformers(ghat, gamma, strong, active, N, role, fallbacks):
    """PZF toward each AP's strong set, MR toward the weak set.

    ``ghat`` is (B, M, L, N), ``gamma`` (M, L), ``strong`` (M, L) bool,
    ``active`` (M,) bool.  Returns (B, M, N, L).
    """
    B, M, L, _ = ghat.shape
    out = np.zeros((B, M, N, L), dtype=complex)
    G = np.swapaxes(ghat, 2, 3)  # (B, M, N, L)
    with np.errstate(divide="ignore", invalid="ignore"):
        mr_scale = np.where(gamma > 0, 1.0 / np.sqrt(N * gamma), 0.0)
    for m in np.flatnonzero(active):
        out[:, m] = G[:, m] * mr_scale[m][None, None, :]
        S = np.flatnonzero(strong[m])
        if S.size == 0:
            continue
        Gs = G[:, m][:, :, S]  # (B, N, s)
        theta = _pinv_columns(Gs)
        if theta is None or not np.all(np.isfinite(theta)):
            # keep MR for this AP's strong targets
            fallbacks.append((role, int(m)))
            log.warning("singular %s Gram matrix at AP %d; using MR", role, m)
            continue
        # theta = G (G^H G)^{-1}, normalized by sqrt(E||theta||^2) = 1/sqrt((N-|S|) gamma)
        out[:, m][:, :, S] = theta * np.sqrt((N - S.size) * gamma[m, S])[None, None, :]
    return out


def _pinv_columns(Gs):
    """``G (G^H G)^{-1}`` per trial; the trace-scaled ridge is only added when
    the plain solve fails, so the nulls stay exact on well-conditioned draws."""
    gram = np.conj(np.swapaxes(Gs, 1, 2)) @ Gs
    rhs = np.swapaxes(Gs, 1, 2).conj()
    try:
        sol = np.linalg.solve(gram, rhs)
        if np.all(np.isfinite(sol)):
            return np.swapaxes(sol, 1, 2).conj()
    except np.linalg.LinAlgError:
        pass
    s = gram.shape[-1]
    tr = np.real(np.trace(gram, axis1=1, axis2=2))[:, None, None]
    try:
        sol = np.linalg.solve(gram + RIDGE * tr / s * np.eye(s), rhs)
    except np.linalg.LinAlgError:
        return None
    return np.swapaxes(sol, 1, 2).conj()


def build_precoders(est: EstimatedChannels, ls: LargeScaleState, groups: GroupingState,
                    config: SystemConfig) -> BeamformerSet:
    fb: list = []
    active = groups.a == 1
    b_dl = _beamformers(est.ghat_dl, ls.gamma_dl, groups.S_D, active, config.N, "D", fb)
    b_jam = _beamformers(est.ghat_jam, ls.gamma_jam, groups.S_J, active, config.N, "J", fb)
    return BeamformerSet(b_dl=b_dl, b_jam=b_jam, fallbacks=fb)


def build_combiners(est: EstimatedChannels, ls: LargeScaleState, groups: GroupingState,
                    config: SystemConfig) -> BeamformerSet:
    fb: list = []
    active = groups.a == 0
    v = _beamformers(est.ghat_obs, ls.gamma_obs, groups.S_O, active, config.N, "O", fb)
    return BeamformerSet(v_obs=v, fallbacks=fb)


# ---------------------------------------------------------------------------
# term estimation


class _Moments:
    """Running per-trial sums and squared sums of named arrays."""

    def __init__(self):
        self.n = 0
        self.s1: dict[str, np.ndarray] = {}
        self.s2: dict[str, np.ndarray] = {}

    def add(self, name, samples):
        # samples: (B, ...) real or complex
        s1 = samples.sum(axis=0)
        s2 = (np.abs(samples) ** 2).sum(axis=0)
        if name in self.s1:
            self.s1[name] = self.s1[name] + s1
            self.s2[name] = self.s2[name] + s2
        else:
            self.s1[name], self.s2[name] = s1, s2

    def mean(self, name):
        return self.s1[name] / self.n

    def se(self, name):
        """Standard error of the mean."""
        if self.n < 2:
            return np.full(np.shape(self.s1[name]), np.nan)
        mu = self.s1[name] / self.n
        var = (self.s2[name] / self.n - np.abs(mu) ** 2) * self.n / (self.n - 1)
        return np.sqrt(np.clip(var, 0.0, None) / self.n)


def _batch(ls, groups, config, seed, trials, acc: _Moments):
    r_ch, r_pilot, r_noise = np.random.SeedSequence(seed).spawn(3)
    real = draw_smallscale(ls, config.N, r_ch, trials)
    est = mmse_estimate(real, ls, config, r_pilot)
    pre = build_precoders(est, ls, groups, config)
    comb = build_combiners(est, ls, groups, config)
    rng = np.random.default_rng(r_noise)
    B, M, K, U, N = trials, ls.M, ls.K, ls.U, config.N
    erd = config.eta * config.rho_d
    rho_u = config.rho_u

    # downlink users: A[b, k, k'] = sum_m g_mk^H b_mk'
    A = np.einsum("bmkn,bmnj->bkj", real.g_dl.conj(), pre.b_dl)
    AJ = np.einsum("bmkn,bmnu->bku", real.g_dl.conj(), pre.b_jam)
    pA = np.abs(A) ** 2
    acc.add("dl_gain", np.diagonal(A, axis1=1, axis2=2))
    acc.add("dl_BU_DI", erd * pA.sum(axis=2))  # mean-square part removed later
    acc.add("dl_JI", erd * (np.abs(AJ) ** 2).sum(axis=2))
    acc.add("dl_UI", (rho_u[None, :, None] * np.abs(real.g_utx_user) ** 2).sum(axis=1))
    acc.add("dl_noise", np.abs(_cn(rng, (B, K))) ** 2)

    # untrusted receivers
    BJ = np.einsum("bmun,bmnj->buj", real.g_jam.conj(), pre.b_jam)
    BD = np.einsum("bmun,bmnk->buk", real.g_jam.conj(), pre.b_dl)
    pair = rho_u[None, :] * np.abs(real.g_pair) ** 2
    acc.add("urx_UI", pair.sum(axis=1, keepdims=True) - pair)
    acc.add("urx_JI", erd * (np.abs(BJ) ** 2).sum(axis=2))
    acc.add("urx_DI", erd * (np.abs(BD) ** 2).sum(axis=2))
    acc.add("urx_noise", np.abs(_cn(rng, (B, U))) ** 2)

    # CPU observation of untrusted transmitters: C[b, u, u'] = sum_m v_mu^H g_mu'
    v = comb.v_obs
    C = np.einsum("bmnu,bmjn->buj", v.conj(), real.g_obs)
    pC = rho_u[None, None, :] * np.abs(C) ** 2
    acc.add("obs_gain", np.diagonal(C, axis1=1, axis2=2))
    acc.add("obs_BU_UI", pC.sum(axis=2))
    b_all = np.concatenate([pre.b_dl, pre.b_jam], axis=3)  # (B, M, N, K+U)
    y = np.einsum("bmino,biot->bmnt", real.F_ap, b_all)
    X = np.einsum("bmnu,bmnt->but", v.conj(), y)
    acc.add("obs_AP_cross", erd * (np.abs(X) ** 2).sum(axis=2))
    w = _cn(rng, (B, M, N))
    acc.add("obs_noise", np.abs(np.einsum("bmnu,bmn->bu", v.conj(), w)) ** 2)
    acc.n += B
    return pre.fallbacks + comb.fallbacks


@dataclass
class TermTable:
    """Empirical UatF terms, keyed like :func:`jcam.perf.closed_form_terms`,
    each with a matching standard-error array."""

    trials: int
    terms: dict[str, dict[str, np.ndarray]]
    std_errors: dict[str, dict[str, np.ndarray]]
    fallbacks: list = field(default_factory=list)


def _batch_seeds(seed, trials, batch=BATCH):
    n_batches = max(1, math.ceil(trials / batch))
    seeds = derive_seeds(seed, n_batches)
    sizes = [batch] * (n_batches - 1) + [trials - batch * (n_batches - 1)]
    return list(zip(seeds, sizes))


def uatf_terms(ls: LargeScaleState, groups: GroupingState, config: SystemConfig,
               trials: int, seed=0) -> TermTable:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    acc = _Moments()
    fallbacks = []
    for s, size in _batch_seeds(seed, trials):
        fallbacks += _batch(ls, groups, config, s, size, acc)

    erd = config.eta * config.rho_d
    rho_u = config.rho_u
    T: dict[str, dict[str, np.ndarray]] = {"dl": {}, "urx": {}, "obs": {}}
    E: dict[str, dict[str, np.ndarray]] = {"dl": {}, "urx": {}, "obs": {}}

    mu = acc.mean("dl_gain")
    T["dl"]["DS2"] = erd * np.abs(mu) ** 2
    E["dl"]["DS2"] = 2 * erd * np.abs(mu) * acc.se("dl_gain")
    T["dl"]["BU_DI"] = acc.mean("dl_BU_DI") - T["dl"]["DS2"]
    E["dl"]["BU_DI"] = acc.se("dl_BU_DI")
    for name in ("JI", "UI", "noise"):
        T["dl"][name] = acc.mean("dl_" + name)
        E["dl"][name] = acc.se("dl_" + name)
    den = sum(T["dl"][n] for n in ("BU_DI", "JI", "UI", "noise"))
    T["dl"]["SINR"] = T["dl"]["DS2"] / den
    E["dl"]["SINR"] = T["dl"]["SINR"] * np.hypot(
        _rel(E["dl"]["DS2"], T["dl"]["DS2"]),
        _rel(np.sqrt(sum(E["dl"][n] ** 2 for n in ("BU_DI", "JI", "UI", "noise"))), den),
    )

    for name in ("UI", "JI", "DI", "noise"):
        T["urx"][name] = acc.mean("urx_" + name)
        E["urx"][name] = acc.se("urx_" + name)
    T["urx"]["Gamma"] = sum(T["urx"][n] for n in ("UI", "JI", "DI", "noise"))
    E["urx"]["Gamma"] = np.sqrt(sum(E["urx"][n] ** 2 for n in ("UI", "JI", "DI", "noise")))

    mu = acc.mean("obs_gain")
    T["obs"]["DS2"] = rho_u * np.abs(mu) ** 2
    E["obs"]["DS2"] = 2 * rho_u * np.abs(mu) * acc.se("obs_gain")
    T["obs"]["BU_UI"] = acc.mean("obs_BU_UI") - T["obs"]["DS2"]
    E["obs"]["BU_UI"] = acc.se("obs_BU_UI")
    for name in ("AP_cross", "noise"):
        T["obs"][name] = acc.mean("obs_" + name)
        E["obs"][name] = acc.se("obs_" + name)
    den = T["obs"]["BU_UI"] + T["obs"]["AP_cross"] + T["obs"]["noise"]
    T["obs"]["SINR"] = _safe_div(T["obs"]["DS2"], den)
    E["obs"]["SINR"] = T["obs"]["SINR"] * np.hypot(
        _rel(E["obs"]["DS2"], T["obs"]["DS2"]),
        _rel(np.sqrt(sum(E["obs"][n] ** 2 for n in ("BU_UI", "AP_cross", "noise"))), den),
    )
    return TermTable(trials, T, E, fallbacks)


def _safe_div(num, den):
    out = np.zeros(np.broadcast(num, den).shape)
    np.divide(num, den, out=out, where=den > 0)
    return out


def _rel(err, val):
    val = np.abs(np.asarray(val, dtype=float))
    out = np.zeros(np.broadcast(err, val).shape)
    np.divide(err, val, out=out, where=val > 0)
    return out


# ---------------------------------------------------------------------------
# verification report


@dataclass(frozen=True)
class TermCheck:
    receiver: str
    index: int
    term: str
    closed_form: float
    printed: float
    empirical: float
    std_error: float
    rel_error: float
    printed_rel_error: float
    passed: bool


@dataclass
class VerificationReport:
    rows: list[TermCheck]
    trials: int
    tol: float
    formula: str
    insufficient_samples: bool
    fallbacks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.insufficient_samples and all(r.passed for r in self.rows)

    @property
    def failures(self) -> list[TermCheck]:
        return [r for r in self.rows if not r.passed]

    @property
    def discrepancies(self) -> list[TermCheck]:
        """Terms where the published expression misses simulation by more than ``tol``."""
        return [r for r in self.rows if not r.printed_rel_error <= self.tol]

    def row(self, receiver, index, term) -> TermCheck:
        for r in self.rows:
            if (r.receiver, r.index, r.term) == (receiver, index, term):
                return r
        raise KeyError((receiver, index, term))

    CSV_HEADER = (
        "receiver,index,term,closed_form,printed,empirical,rel_error,printed_rel_error,std_error,pass"
    )

    def to_csv(self) -> str:
        lines = [self.CSV_HEADER]
        for r in self.rows:
            lines.append(
                f"{r.receiver},{r.index},{r.term},{r.closed_form:.10g},{r.printed:.10g},"
                f"{r.empirical:.10g},{r.rel_error:.6g},{r.printed_rel_error:.6g},"
                f"{r.std_error:.6g},{int(r.passed)}"
            )
        return "\n".join(lines) + "\n"

    def summary(self) -> str:
        out = [
            f"verification: {len(self.rows)} terms, {self.trials} trials, tol={self.tol:g}, "
            f"closed form '{self.formula}': {'PASS' if self.passed else 'FAIL'}"
        ]
        if self.insufficient_samples:
            out.append("  insufficient samples: need at least 2 trials for error estimates")
        for r in self.failures:
            out.append(
                f"  FAIL {r.receiver}[{r.index}] {r.term}: closed={r.closed_form:.6g} "
                f"empirical={r.empirical:.6g} rel_err={r.rel_error:.3g}"
            )
        disc = self.discrepancies
        if disc:
            out.append(f"  published-formula discrepancies ({len(disc)} terms beyond tol):")
            for r in disc:
                out.append(
                    f"    {r.receiver}[{r.index}] {r.term}: printed={r.printed:.6g} "
                    f"empirical={r.empirical:.6g} rel_err={r.printed_rel_error:.3g}"
                )
        return "\n".join(out)


def relative_error(value, reference) -> float:
    value, reference = float(value), float(reference)
    if reference == 0.0:
        return 0.0 if value == 0.0 else math.inf
    return abs(value - reference) / abs(reference)


def verify_closed_form(ls: LargeScaleState, groups: GroupingState, config: SystemConfig,
                       trials: int, tol: float, seed=0,
                       table: TermTable | None = None) -> VerificationReport:
    """Compare every closed-form term with its simulated counterpart.

    ``closed_form`` uses ``config.formula``; the published expressions are
    always reported alongside so their mismatch is visible.
    """
    table = table or uatf_terms(ls, groups, config, trials, seed)
    cf = closed_form_terms(ls, groups, config, config.formula)
    pr = closed_form_terms(ls, groups, config, "printed")
    rows = []
    for receiver in ("dl", "urx", "obs"):
        for term, emp in table.terms[receiver].items():
            se = table.std_errors[receiver][term]
            for i in range(len(emp)):
                closed = float(cf[receiver][term][i])
                printed = float(pr[receiver][term][i])
                e = float(emp[i])
                # rel. error against the simulated value; both zero counts as exact
                err = relative_error(closed, e)
                rows.append(TermCheck(
                    receiver, i, term, closed, printed, e, float(se[i]),
                    err, relative_error(printed, e), err <= tol,
                ))
    return VerificationReport(rows, table.trials, tol, config.formula, trials < 2,
                              table.fallbacks)


# ---------------------------------------------------------------------------
# smaller oracles


def empirical_msp(sinr_obs, gamma_u, rho_u, beta_pair_u, trials, seed=0) -> float:
    """Frequency of ``sinr_obs >= rho_u |g|^2 / gamma_u`` with ``|g|^2`` exponential."""
    rng = np.random.default_rng(seed)
    g2 = np.abs(_cn(rng, trials, beta_pair_u)) ** 2
    return float(np.mean(sinr_obs >= rho_u * g2 / gamma_u))


def precoder_statistics(ls: LargeScaleState, groups: GroupingState, config: SystemConfig,
                        trials: int, seed=0) -> dict:
    """Power-normalization and zero-forcing checks on explicit beamformers.

    Returns mean ``||b||^2`` over MR and PZF beams, the per-AP mean transmit
    power ``E||x_m||^2`` (``x_power`` averages the unit-power symbols out
    analytically, ``x_power_sampled`` draws Gaussian symbols), and the worst relative
    zero-forcing leakage ``|ghat_j^H b_k| / (||ghat_j|| ||b_k||)`` between
    distinct strong targets (precoders and combiners).
    """
    mr = pzf = 0.0
    n_mr = n_pzf = 0
    x_power = np.zeros(ls.M)
    x_sampled = np.zeros(ls.M)
    leak = 0.0
    n = 0
    erd = config.eta * config.rho_d
    for s, size in _batch_seeds(seed, trials):
        r_ch, r_pilot, r_sym = np.random.SeedSequence(s).spawn(3)
        real = draw_smallscale(ls, config.N, r_ch, size, with_ap=False)
        est = mmse_estimate(real, ls, config, r_pilot)
        pre = build_precoders(est, ls, groups, config)
        comb = build_combiners(est, ls, groups, config)
        rng = np.random.default_rng(r_sym)
        for b, S, active in ((pre.b_dl, groups.S_D, groups.a == 1),
                             (pre.b_jam, groups.S_J, groups.a == 1)):
            p = (np.abs(b) ** 2).sum(axis=2)  # (B, M, L)
            weak = (~S) & active[:, None]
            strong = S & active[:, None]
            mr += p[:, weak].sum()
            n_mr += size * weak.sum()
            pzf += p[:, strong].sum()
            n_pzf += size * strong.sum()
        b_all = np.concatenate([pre.b_dl, pre.b_jam], axis=3)
        sym = _cn(rng, (size, b_all.shape[3]))
        x = np.sqrt(erd) * np.einsum("bmnt,bt->bmn", b_all, sym)
        x_sampled += (np.abs(x) ** 2).sum(axis=(0, 2))
        x_power += erd * (np.abs(b_all) ** 2).sum(axis=(0, 2, 3))
        for ghat, b, S in ((est.ghat_dl, pre.b_dl, groups.S_D),
                           (est.ghat_jam, pre.b_jam, groups.S_J),
                           (est.ghat_obs, comb.v_obs, groups.S_O)):
            leak = max(leak, _zf_leak(ghat, b, S))
        n += size
    return {
        "mr_norm": mr / n_mr if n_mr else float("nan"),
        "pzf_norm": pzf / n_pzf if n_pzf else float("nan"),
        "x_power": x_power / n,
        "x_power_sampled": x_sampled / n,
        "zf_leak": leak,
    }


def _zf_leak(ghat, b, S) -> float:
    worst = 0.0
    for m in range(S.shape[0]):
        idx = np.flatnonzero(S[m])
        if idx.size < 2:
            continue
        g = ghat[:, m][:, idx, :]  # (B, s, N)
        w = b[:, m][:, :, idx]  # (B, N, s)
        inner = np.abs(np.einsum("bjn,bnk->bjk", g.conj(), w))
        norms = np.linalg.norm(g, axis=2)[:, :, None] * np.linalg.norm(w, axis=1)[:, None, :]
        rel = inner / norms
        rel[:, np.arange(idx.size), np.arange(idx.size)] = 0.0
        worst = max(worst, float(rel.max()))
    return worst


def estimation_statistics(beta: float, tau: int, rho: float, trials: int, seed=0) -> dict:
    """Sample variance of the estimate and estimate/error correlation for one link."""
    rng = np.random.default_rng(seed)
    g = _cn(rng, trials, beta)
    noise = _cn(rng, trials) / np.sqrt(tau * rho)
    ghat = mmse_gain(beta, tau, rho) * (g + noise)
    err = g - ghat
    corr = np.abs(np.mean(ghat * err.conj())) / np.sqrt(np.mean(np.abs(ghat) ** 2) * np.mean(np.abs(err) ** 2))
    return {
        "var_hat": float(np.mean(np.abs(ghat) ** 2)),
        "gamma": float(mmse_quality(beta, tau, rho)),
        "corr": float(corr),
        "rel_err_norm": float(np.mean(np.abs(err)) / np.mean(np.abs(g))),
    }
