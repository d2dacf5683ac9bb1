"""Experiment drivers: row schemas, seed bookkeeping, reproducible artifacts."""

import json

import numpy as np
import pytest

from tubalmap import (
    ExperimentReport, run_fig1_study, run_localization_eval,
    run_recovery_curve, sample_uniform_tubes,
)
from tubalmap.experiments import (
    CDF_COLUMNS, CURVE_COLUMNS, CURVE_TRIAL_COLUMNS, FIG1_COLUMNS,
    POINT_COLUMNS, SUMMARY_COLUMNS, write_csv, write_curve_report,
    write_fig1_report, write_localization_report,
)

FAST = dict(max_iters=150)


@pytest.fixture(scope="module")
def fig1_report():
    return run_fig1_study(dims=(8, 8, 4), rank=2, rate=0.5, ratios=(0.0, 0.2),
                          magnitude=50.0, trials=2, base_seed=3, solver_kw=FAST)


@pytest.fixture(scope="module")
def curve_report():
    return run_recovery_curve(dims=(8, 8, 4), rank=2, rates=(0.3, 0.6),
                              methods=("stc", "tcwa"), trials=2, base_seed=0,
                              solver_kw=FAST)


@pytest.fixture(scope="module")
def localize_report():
    return run_localization_eval(dims=(8, 8, 4), rank=2, rate=0.5, k=2,
                                 test_points=10, trials=2, base_seed=0,
                                 methods=("stc", "tcwa"), solver_kw=FAST)


def test_fig1_rows(fig1_report):
    rows = fig1_report.rows
    # per seed: one stc row per ratio plus one tcwa row at the largest ratio
    assert len(rows) == 2 * (2 + 1)
    assert {r["seed"] for r in rows} == {3, 4}
    assert {r["method"] for r in rows if r["anomaly_ratio"] == 0.2} == {"stc", "tcwa"}
    assert {r["method"] for r in rows if r["anomaly_ratio"] == 0.0} == {"stc"}
    for r in rows:
        assert set(FIG1_COLUMNS) <= set(r)
        assert r["nse"] >= 0.0 and r["wall_time_s"] > 0.0
    assert fig1_report.config["study"] == "fig1"


def test_fig1_artifacts_deterministic(tmp_path, fig1_report):
    d1, d2 = tmp_path / "one", tmp_path / "two"
    d1.mkdir(), d2.mkdir()
    write_fig1_report(fig1_report, d1)
    rerun = run_fig1_study(dims=(8, 8, 4), rank=2, rate=0.5, ratios=(0.0, 0.2),
                           magnitude=50.0, trials=2, base_seed=3, solver_kw=FAST)
    write_fig1_report(rerun, d2)
    assert (d1 / "fig1.csv").read_bytes() == (d2 / "fig1.csv").read_bytes()
    header = (d1 / "fig1.csv").read_text().splitlines()[0]
    assert header == ",".join(FIG1_COLUMNS)
    doc = json.loads((d1 / "fig1.json").read_text())
    assert set(doc) == {"config", "rows", "detail", "tables"}
    assert all("wall_time_s" in r for r in doc["rows"])
    assert "wall_time_s" not in header


def test_csv_value_formatting(tmp_path):
    rows = [dict(a=0.1, b=True, c=3), dict(a=2.0, b=False, c=-1)]
    path = tmp_path / "x.csv"
    write_csv(path, ("a", "b", "c"), rows)
    lines = path.read_text().splitlines()
    assert lines == ["a,b,c", "0.1,true,3", "2.0,false,-1"]


def test_curve_pairing_and_aggregates(curve_report):
    rows, detail = curve_report.rows, curve_report.detail
    assert len(rows) == 2 * 2 and len(detail) == 2 * 2 * 2
    # seed layout: trial seeds restart from base + 100 * rate_index
    assert {r["seed"] for r in detail if r["rate"] == 0.3} == {0, 1}
    assert {r["seed"] for r in detail if r["rate"] == 0.6} == {100, 101}
    for r in rows:
        sel = [d["nse"] for d in detail
               if d["rate"] == r["rate"] and d["method"] == r["method"]]
        assert r["trials"] == 2 == len(sel)
        np.testing.assert_allclose(r["mean_nse"], np.mean(sel), rtol=1e-12)
        np.testing.assert_allclose(r["std_nse"], np.std(sel), rtol=1e-12)
    # paired design: both methods see the same seeds at each rate
    for rate in (0.3, 0.6):
        per_method = {m: sorted(d["seed"] for d in detail
                                if d["rate"] == rate and d["method"] == m)
                      for m in ("stc", "tcwa")}
        assert per_method["stc"] == per_method["tcwa"]


def test_curve_artifacts(tmp_path, curve_report):
    write_curve_report(curve_report, tmp_path)
    assert (tmp_path / "curve.csv").read_text().splitlines()[0] == ",".join(CURVE_COLUMNS)
    assert (tmp_path / "curve_trials.csv").read_text().splitlines()[0] == \
        ",".join(CURVE_TRIAL_COLUMNS)
    doc = json.loads((tmp_path / "curve.json").read_text())
    assert doc["config"]["study"] == "curve"
    assert len(doc["detail"]) == len(curve_report.detail)


def test_localize_rows(localize_report):
    rows, detail = localize_report.rows, localize_report.detail
    assert len(rows) == 2 * 2 and len(detail) == 2 * 2 * 10
    for r in rows:
        assert set(SUMMARY_COLUMNS) <= set(r)
        assert r["points"] == 10
        assert 0.0 <= r["p80_m"]
    for d in detail:
        assert set(POINT_COLUMNS) <= set(d)
        assert 0 <= d["rp_i"] < 8 and 0 <= d["rp_j"] < 8
        assert d["error_m"] >= 0.0


def test_localize_points_are_held_out(localize_report):
    # test points must avoid the sampled tubes of their trial's mask
    for d in localize_report.detail:
        omega = sample_uniform_tubes(8, 8, 0.5, seed=d["seed"] + 13)
        assert not omega.flags[d["rp_i"], d["rp_j"]]


def test_localize_pooled_cdf(localize_report):
    cdfs = localize_report.tables["pooled_cdf"]
    assert set(cdfs) == {"stc", "tcwa"}
    for table in cdfs.values():
        assert len(table) == 2 * 10
        assert table[-1][1] == 1.0
        values = [v for v, _ in table]
        assert values == sorted(values)


def test_localize_artifacts(tmp_path, localize_report):
    write_localization_report(localize_report, tmp_path)
    for name, cols in (("localize_points.csv", POINT_COLUMNS),
                       ("localize_summary.csv", SUMMARY_COLUMNS),
                       ("localize_cdf.csv", CDF_COLUMNS)):
        assert (tmp_path / name).read_text().splitlines()[0] == ",".join(cols)
    doc = json.loads((tmp_path / "localize.json").read_text())
    assert doc["tables"]["pooled_cdf"].keys() == {"stc", "tcwa"}


def test_report_json_round_trip(tmp_path):
    report = ExperimentReport(config=dict(study="unit"), rows=[dict(v=1.5)],
                              detail=[], tables=dict(t=[[1.0, 0.5]]))
    path = tmp_path / "r.json"
    report.to_json(path)
    doc = json.loads(path.read_text())
    assert doc["config"] == {"study": "unit"}
    assert doc["rows"] == [{"v": 1.5}]
