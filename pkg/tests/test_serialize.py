import csv

import numpy as np

from jcam.config import SystemConfig
from jcam.grouping import ModeAssignment
from jcam.perf import evaluate
from jcam.scenario import make_drop
from jcam.serialize import REPORT_HEADER, report_rows, scenario_from_text, scenario_to_text, write_csv


def test_scenario_roundtrip_exact():
    cfg = SystemConfig(M=5, N=4, K=3, U=2)
    layout, ls = make_drop(cfg, 12)
    text = scenario_to_text(layout, ls)
    lay2, ls2 = scenario_from_text(text)
    for name in ("ap_xy", "user_xy", "urx_xy", "utx_xy"):
        np.testing.assert_array_equal(getattr(layout, name), getattr(lay2, name))
    for name in ls.__dataclass_fields__:
        np.testing.assert_array_equal(getattr(ls, name), getattr(ls2, name))
    assert lay2.d_min_m == layout.d_min_m
    assert scenario_to_text(lay2, ls2) == text


def test_scenario_roundtrip_without_untrusted_pairs():
    cfg = SystemConfig(M=3, N=4, K=2, U=0)
    layout, ls = make_drop(cfg, 1)
    _, ls2 = scenario_from_text(scenario_to_text(layout, ls))
    assert ls2.beta_jam.shape == (3, 0)
    assert ls2.beta_pair.shape == (0,)


def test_report_rows_and_csv(tmp_path):
    cfg = SystemConfig(M=4, N=4, K=2, U=2)
    _, ls = make_drop(cfg, 1)
    rep = evaluate(ls, None, ModeAssignment.from_monitoring(4, [0, 1]), cfg)
    rows = report_rows(rep, "random")
    assert len(rows) == cfg.K + cfg.U
    path = tmp_path / "r.csv"
    write_csv(path, REPORT_HEADER, rows)
    with open(path, newline="") as fh:
        got = list(csv.reader(fh))
    assert tuple(got[0]) == REPORT_HEADER
    assert got[1][:3] == ["random", "user", "0"]
    assert got[-1][:3] == ["random", "link", "1"]
    assert float(got[-1][7]) == float(f"{rep.msp[1]:.10g}")
