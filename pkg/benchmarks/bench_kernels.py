"""Compare the compiled and NumPy kernel backends.

    python3 benchmarks/bench_kernels.py --sizes 10 40 160 --repeat 200
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from jcam import _pykernels, kernels
from jcam.assignment import greedy_mode_assignment
from jcam.config import SystemConfig
from jcam.grouping import role_masks
from jcam.perf import contributions
from jcam.scenario import make_drop


def _backends():
    out = {"python": _pykernels}
    try:
        from jcam import _ckernels
    except ImportError:
        pass
    else:
        out["cython"] = _ckernels
    return out


def bench(M: int, K: int, U: int, repeat: int, seed: int = 0) -> list[tuple[str, str, float]]:
    cfg = SystemConfig(M=M, N=6, K=K, U=U)
    _, ls = make_drop(cfg, seed)
    c = contributions(ls, role_masks(ls, cfg), cfg)
    rng = np.random.default_rng(seed)
    a = (rng.random(M) < 0.7).astype(np.int8)
    mo = a == 0
    mon_in = ls.beta_ap[mo].sum(axis=0)
    dl_out = ls.beta_ap[:, ~mo].sum(axis=1)
    cross = float(ls.beta_ap[np.ix_(mo, ~mo)].sum())

    rows = []
    saved = kernels._impl
    try:
        for name, impl in _backends().items():
            t = min(timeit.repeat(lambda: kernels.evaluate_sums(a, c, impl=impl), number=repeat, repeat=3))
            rows.append((name, "evaluate", t / repeat))
            t = min(timeit.repeat(lambda: kernels.scan_candidates(a, c, mon_in, dl_out, cross, impl=impl),
                                  number=repeat, repeat=3))
            rows.append((name, "scan", t / repeat))
            kernels._impl = impl
            n = max(1, repeat // 20)
            t = min(timeit.repeat(lambda: greedy_mode_assignment(ls, cfg), number=n, repeat=3))
            rows.append((name, "greedy", t / n))
    finally:
        kernels._impl = saved
    return rows


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[10, 40, 160])
    p.add_argument("-K", type=int, default=6)
    p.add_argument("-U", type=int, default=6)
    p.add_argument("--repeat", type=int, default=200)
    args = p.parse_args(argv)

    print(f"default backend: {kernels.BACKEND}")
    print(f"{'M':>5} {'op':<9} {'backend':<8} {'time':>12} {'speedup':>8}")
    for M in args.sizes:
        rows = bench(M, args.K, args.U, args.repeat)
        base = {op: t for name, op, t in rows if name == "python"}
        for name, op, t in rows:
            print(f"{M:>5} {op:<9} {name:<8} {t * 1e6:>10.1f}us {base[op] / t:>7.1f}x")


if __name__ == "__main__":
    main()
