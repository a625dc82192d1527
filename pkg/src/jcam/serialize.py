"""Plain-text tabular formats.

Scenario files hold one CSV block per table, each introduced by a
``# block: <name>`` line::

    # block: nodes
    kind,index,x_m,y_m
    ap,0,512.3,77.1
    ...

    # block: beta_dl
    <M rows of K comma-separated values>
"""

from __future__ import annotations

import csv
import io

import numpy as np

from .perf import PerformanceReport
from .scenario import Layout, LargeScaleState

_MATRICES = (
    "beta_dl", "beta_jam", "beta_obs", "beta_ap", "beta_pair", "beta_utx_user",
    "gamma_dl", "gamma_jam", "gamma_obs",
)
_NODE_KINDS = (("ap", "ap_xy"), ("user", "user_xy"), ("urx", "urx_xy"), ("utx", "utx_xy"))


def _fmt(x) -> str:
    return repr(float(x))


def scenario_to_text(layout: Layout, ls: LargeScaleState) -> str:
    out = [f"# area_side_m={_fmt(layout.area_side_m)} d_min_m={_fmt(layout.d_min_m)}"]
    out += ["# block: nodes", "kind,index,x_m,y_m"]
    for kind, attr in _NODE_KINDS:
        for i, (x, y) in enumerate(getattr(layout, attr)):
            out.append(f"{kind},{i},{_fmt(x)},{_fmt(y)}")
    for name in _MATRICES:
        arr = np.atleast_2d(getattr(ls, name))
        out += ["", f"# block: {name} shape={'x'.join(map(str, getattr(ls, name).shape))}"]
        out += [",".join(_fmt(v) for v in row) for row in arr]
    return "\n".join(out) + "\n"


def scenario_from_text(text: str) -> tuple[Layout, LargeScaleState]:
    header, *rest = text.split("# block: ")
    meta = dict(kv.split("=") for kv in header.lstrip("# ").split())
    blocks = {}
    for chunk in rest:
        title, _, body = chunk.partition("\n")
        name, *opts = title.split()
        blocks[name] = (dict(o.split("=") for o in opts), [ln for ln in body.splitlines() if ln])

    nodes: dict[str, list] = {kind: [] for kind, _ in _NODE_KINDS}
    for row in csv.DictReader(io.StringIO("\n".join(blocks["nodes"][1]))):
        nodes[row["kind"]].append((float(row["x_m"]), float(row["y_m"])))
    layout = Layout(
        **{attr: np.array(nodes[kind], dtype=float).reshape(-1, 2) for kind, attr in _NODE_KINDS},
        area_side_m=float(meta["area_side_m"]),
        d_min_m=float(meta["d_min_m"]),
    )
    arrays = {}
    for name in _MATRICES:
        opts, lines = blocks[name]
        shape = tuple(int(s) for s in opts["shape"].split("x") if s)
        vals = [float(v) for ln in lines for v in ln.split(",") if v != ""]
        arrays[name] = np.array(vals, dtype=float).reshape(shape)
    return layout, LargeScaleState(**arrays)


REPORT_HEADER = ("strategy", "kind", "index", "sinr", "se", "gamma_u", "sinr_obs", "msp")


def report_rows(report: PerformanceReport, strategy: str = "") -> list[list[str]]:
    """One row per downlink user and per untrusted link."""
    rows = []
    for k, (s, se) in enumerate(zip(report.sinr_dl, report.se_dl)):
        rows.append([strategy, "user", str(k), _g(s), _g(se), "", "", ""])
    for u, (g, so, p) in enumerate(zip(report.gamma_u_denom, report.sinr_obs, report.msp)):
        rows.append([strategy, "link", str(u), "", "", _g(g), _g(so), _g(p)])
    return rows


def _g(x) -> str:
    return f"{float(x):.10g}"


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
