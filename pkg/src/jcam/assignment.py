"""AP mode-assignment strategies: greedy, random, exhaustive, and the
co-located massive-MIMO baseline."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .config import SystemConfig
from .grouping import GroupingState, ModeAssignment, groups_from_masks, role_masks
from .perf import PerformanceReport, contributions, evaluate_contrib
from .scenario import Layout, LargeScaleState, build_large_scale, derive_seeds, place_nodes

BRUTE_FORCE_MAX_M = 12


@dataclass
class AssignmentResult:
    assignment: ModeAssignment
    report: PerformanceReport
    iterations: int = 0
    candidate_evaluations: int = 0
    feasible: bool = True
    history: list[float] = field(default_factory=list)


def _qos_ok(report: PerformanceReport, qos_se: float) -> bool:
    return report.min_se >= qos_se


def greedy_mode_assignment(
    ls: LargeScaleState, config: SystemConfig, formula: str | None = None
) -> AssignmentResult:
    """Move APs one at a time from downlink to monitoring while the minimum
    MSP improves by at least ``e_min`` and every user keeps ``qos_se``.

    Each iteration scores every downlink AP as a tentative move; candidates
    breaking the QoS floor are dropped before the argmax.
    """
    M = ls.M
    c = contributions(ls, role_masks(ls, config), config, formula)
    a = np.ones(M, dtype=np.int8)
    report = evaluate_contrib(c, a, config)
    best = report.min_msp
    history = [best]
    iterations = evaluations = 0
    if ls.U == 0:
        return AssignmentResult(ModeAssignment(a), report, 0, 0, _qos_ok(report, config.qos_se), history)

    # AP-to-AP leakage bookkeeping, kept incrementally: O(M) per accepted move
    beta_ap = ls.beta_ap
    mon_in = np.zeros(M)  # sum over monitoring j of beta_ap[j, c]
    dl_out = beta_ap.sum(axis=1)  # sum over downlink i of beta_ap[c, i]
    cross_total = 0.0

    while True:
        pi, xi = kernels.scan_candidates(a, c, mon_in, dl_out, cross_total)
        iterations += 1
        cand = np.flatnonzero(a == 1)
        evaluations += cand.size
        feasible = cand[xi[cand] >= config.qos_se]
        if feasible.size == 0:
            break
        m_star = feasible[np.argmax(pi[feasible])]  # first maximum = lowest index
        if pi[m_star] - best < config.e_min:
            break
        trial = a.copy()
        trial[m_star] = 0
        trial_report = evaluate_contrib(c, trial, config)
        if not _qos_ok(trial_report, config.qos_se):
            # incremental and direct sums disagree in the last ulp; keep QoS strict
            break
        cross_total += dl_out[m_star] - mon_in[m_star]
        mon_in += beta_ap[m_star]
        dl_out -= beta_ap[:, m_star]
        a = trial
        report = trial_report
        best = report.min_msp
        history.append(best)

    return AssignmentResult(
        ModeAssignment(a), report, iterations, evaluations, _qos_ok(report, config.qos_se), history
    )


def random_mode_assignment(
    ls: LargeScaleState, config: SystemConfig, seed: int, formula: str | None = None
) -> AssignmentResult:
    """Exactly ``floor(M/2)`` APs, chosen uniformly, switched to monitoring."""
    rng = np.random.default_rng(seed)
    monitoring = rng.choice(ls.M, size=ls.M // 2, replace=False)
    assignment = ModeAssignment.from_monitoring(ls.M, monitoring)
    c = contributions(ls, role_masks(ls, config), config, formula)
    report = evaluate_contrib(c, assignment.a, config)
    return AssignmentResult(assignment, report, 0, 1, _qos_ok(report, config.qos_se))


def brute_force_assignment(
    ls: LargeScaleState, config: SystemConfig, formula: str | None = None
) -> AssignmentResult:
    """Best min-MSP over all ``2**M`` mode vectors meeting the QoS floor.

    Ties go to the lexicographically smallest vector.  When nothing is
    feasible the all-downlink vector is returned with ``feasible=False``.
    """
    M = ls.M
    if M > BRUTE_FORCE_MAX_M:
        raise ValueError(f"brute force limited to M <= {BRUTE_FORCE_MAX_M}, got {M}")
    c = contributions(ls, role_masks(ls, config), config, formula)
    best = None
    count = 0
    for bits in itertools.product((0, 1), repeat=M):
        a = np.array(bits, dtype=np.int8)
        report = evaluate_contrib(c, a, config)
        count += 1
        if not _qos_ok(report, config.qos_se):
            continue
        if best is None or report.min_msp > best[1].min_msp:
            best = (a, report)
    if best is None:
        a = np.ones(M, dtype=np.int8)
        return AssignmentResult(ModeAssignment(a), evaluate_contrib(c, a, config), 1, count, False)
    return AssignmentResult(ModeAssignment(best[0]), best[1], 1, count, True)


def colocated_config(config: SystemConfig) -> SystemConfig:
    if (config.M * config.N) % 2:
        raise ValueError(f"co-located baseline needs M*N even, got M={config.M}, N={config.N}")
    return config.replace(M=2, N=config.M * config.N // 2)


def colocated_layout(config: SystemConfig, seed) -> Layout:
    """Two virtual APs at the area center, ``d_min`` apart; other nodes are
    placed exactly as in the cell-free drop with the same seed."""
    base = place_nodes(config, seed)
    mid = config.area_side_m / 2.0
    half = config.d_min_m / 2.0
    ap_xy = np.array([[mid - half, mid], [mid + half, mid]])
    return Layout(ap_xy, base.user_xy, base.urx_xy, base.utx_xy, base.area_side_m, base.d_min_m)


def colocated_baseline(
    config: SystemConfig, seed: int
) -> tuple[Layout, LargeScaleState, ModeAssignment, GroupingState, SystemConfig]:
    """Co-located array: ``M*N/2`` antennas monitor, ``M*N/2`` serve and jam.

    Node positions match :func:`jcam.scenario.make_drop` for the same seed.
    Also returns the equivalent two-AP config the closed forms run on.
    """
    cfg = colocated_config(config)
    s_layout, s_fading = derive_seeds(seed, 2)
    layout = colocated_layout(config, s_layout)
    ls = build_large_scale(layout, cfg, s_fading)
    a = ModeAssignment(np.array([0, 1], dtype=np.int8))
    groups = groups_from_masks(role_masks(ls, cfg), a)
    return layout, ls, a, groups, cfg


def colocated_result(config: SystemConfig, seed: int, formula: str | None = None) -> AssignmentResult:
    _, ls, a, _, cfg = colocated_baseline(config, seed)
    c = contributions(ls, role_masks(ls, cfg), cfg, formula)
    report = evaluate_contrib(c, a.a, cfg)
    return AssignmentResult(a, report, 0, 1, _qos_ok(report, config.qos_se))
