"""Command-line experiment harness: ``jcam single | verify | sweep``.

All three read a flat ``key = value`` config file.  Output CSVs are
byte-identical across reruns with the same inputs; the ``runtime_ms`` column
is left empty unless ``--timing`` is given.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .assignment import (
    BRUTE_FORCE_MAX_M,
    AssignmentResult,
    brute_force_assignment,
    colocated_result,
    greedy_mode_assignment,
    random_mode_assignment,
)
from .config import ConfigError, ExperimentSpec, SystemConfig, load_config
from .grouping import build_groups
from .mc import verify_closed_form
from .scenario import derive_seeds, make_drop
from .serialize import REPORT_HEADER, report_rows, scenario_to_text, write_csv

log = logging.getLogger("jcam")

RESULT_HEADER = (
    "strategy", "seed", "sweep_var", "sweep_val", "min_se", "min_msp",
    "iterations", "candidate_evaluations", "runtime_ms",
)


def drop_seed(master: int, drop: int) -> int:
    """Seed of drop ``drop`` under master seed ``master``."""
    return derive_seeds([master, drop], 1)[0]


def run_strategies(config: SystemConfig, seed: int, strategies, fixed_qos: bool = False,
                   timing: bool = False) -> list[tuple[str, AssignmentResult, str]]:
    """Run the requested strategies on one drop.

    Unless ``fixed_qos`` is set, the QoS floor is the random baseline's
    minimum SE on this drop, computed before any other strategy runs.
    """
    _, ls = make_drop(config, seed)
    s_random = derive_seeds([seed, 1], 1)[0]
    t0 = time.perf_counter()
    rand = random_mode_assignment(ls, config, s_random)
    t_rand = time.perf_counter() - t0
    if not fixed_qos:
        config = config.replace(qos_se=rand.report.min_se)
        rand.feasible = True
    out = []
    for name in strategies:
        t0 = time.perf_counter()
        if name == "random":
            res, elapsed = rand, t_rand
        else:
            if name == "greedy":
                res = greedy_mode_assignment(ls, config)
            elif name == "brute":
                if ls.M > BRUTE_FORCE_MAX_M:
                    log.warning("skipping brute force for M=%d", ls.M)
                    continue
                res = brute_force_assignment(ls, config)
            elif name == "colocated":
                res = colocated_result(config, seed)
            else:
                raise ConfigError(f"unknown strategy {name!r}")
            elapsed = time.perf_counter() - t0
        out.append((name, res, f"{elapsed * 1e3:.3f}" if timing else ""))
    return out


def _row(name, seed, var, val, res: AssignmentResult, runtime):
    return [
        name, str(seed), var, val, f"{res.report.min_se:.10g}", f"{res.report.min_msp:.10g}",
        str(res.iterations), str(res.candidate_evaluations), runtime,
    ]


def cmd_single(args) -> int:
    config, values = load_config(args.config)
    seed = args.seed if args.seed is not None else config.seed
    strategies = values.get("strategies", ("greedy", "random", "brute", "colocated"))
    results = run_strategies(config, seed, strategies, fixed_qos="qos_se" in values,
                             timing=args.timing)
    out = Path(args.out or values.get("out") or "single.csv")
    write_csv(out, RESULT_HEADER, [_row(n, seed, "", "", r, t) for n, r, t in results])
    report_path = out.with_name(out.stem + "_report.csv")
    write_csv(report_path, REPORT_HEADER,
              [row for n, r, _ in results for row in report_rows(r.report, n)])
    if args.scenario:
        layout, ls = make_drop(config, seed)
        Path(args.scenario).write_text(scenario_to_text(layout, ls))
    print(f"drop seed {seed}: M={config.M} N={config.N} K={config.K} U={config.U}")
    for name, res, _ in results:
        print(f"  {name:<10} min_se={res.report.min_se:.4f} min_msp={res.report.min_msp:.4f} "
              f"monitoring={len(res.assignment.monitoring)}/{len(res.assignment)}")
    print(f"wrote {out} and {report_path}")
    return 0


def cmd_verify(args) -> int:
    config, values = load_config(args.config)
    trials = args.trials if args.trials is not None else values.get("trials", 10_000)
    tol = args.tol if args.tol is not None else values.get("tol", 0.05)
    if trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials}")
    if tol <= 0:
        raise ConfigError(f"tol must be > 0, got {tol}")
    seed = args.seed if args.seed is not None else config.seed
    _, ls = make_drop(config, seed)
    # a random half split exercises both AP modes
    assignment = random_mode_assignment(ls, config, derive_seeds([seed, 1], 1)[0]).assignment
    groups = build_groups(ls, assignment, config)
    report = verify_closed_form(ls, groups, config, trials, tol, seed=derive_seeds([seed, 2], 1)[0])
    out = Path(args.out or values.get("out") or "verify.csv")
    out.write_text(report.to_csv())
    print(report.summary())
    print(f"wrote {out}")
    return 0 if report.passed else 1


def _sweep_job(job):
    config, seed, strategies, timing, var, val = job
    return [_row(n, seed, var, val, r, t) for n, r, t in run_strategies(config, seed, strategies,
                                                                          timing=timing)]


def cmd_sweep(args) -> int:
    _, values = load_config(args.config)
    spec = ExperimentSpec.from_values(values, source=args.config)
    master = args.seed if args.seed is not None else spec.base.seed
    jobs = []
    for val in spec.values:
        cfg = spec.point_config(val)
        label = f"{val:g}"
        for d in range(spec.drops):
            jobs.append((cfg, drop_seed(master, d), spec.strategies, args.timing, spec.sweep_var, label))
    if args.jobs and args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            chunks = list(pool.map(_sweep_job, jobs))
    else:
        chunks = [_sweep_job(j) for j in jobs]
    rows = [row for chunk in chunks for row in chunk]
    out = Path(args.out or spec.out or "sweep.csv")
    write_csv(out, RESULT_HEADER, rows)

    print(f"sweep over {spec.sweep_var}: {len(spec.values)} points x {spec.drops} drops")
    for val in spec.values:
        label = f"{val:g}"
        for name in spec.strategies:
            msp = [float(r[5]) for r in rows if r[3] == label and r[0] == name]
            if msp:
                print(f"  {spec.sweep_var}={label:<6} {name:<10} mean min_msp={np.mean(msp):.4f} "
                      f"(+/- {np.std(msp, ddof=1) / np.sqrt(len(msp)) if len(msp) > 1 else 0:.4f})")
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jcam", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="key = value config file")
        sp.add_argument("--out", help="output CSV path")
        sp.add_argument("--seed", type=int, help="override the config seed")

    sp = sub.add_parser("single", help="one drop, all strategies")
    common(sp)
    sp.add_argument("--timing", action="store_true", help="fill the runtime_ms column")
    sp.add_argument("--scenario", help="also write the drop's layout and fading tables here")
    sp.set_defaults(func=cmd_single)

    sp = sub.add_parser("verify", help="closed forms against Monte Carlo")
    common(sp)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--tol", type=float)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("sweep", help="parameter sweep over many drops")
    common(sp)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--timing", action="store_true", help="fill the runtime_ms column")
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
