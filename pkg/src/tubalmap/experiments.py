"""Experiment drivers: anomaly degradation, recovery-rate curves, localization.

Each driver is a pure function of its arguments; every trial's seed is
derived arithmetically from the base seed and echoed in the output rows, so
any row can be reproduced in isolation.  Wall times travel in the JSON
reports only; the CSV tables are byte-stable across reruns.
"""

import dataclasses
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .completion import SolverConfig, solve
from .localization import (
    RadioMap, cdf_percentile, error_cdf, knn_localize, localization_error, nse,
)
from .sampling import (
    AnomalySpec, apply_mask, generate_low_tubal_rank, inject_anomalies,
    sample_uniform_tubes,
)

CURVE_RATES = tuple(round(0.1 * k, 1) for k in range(1, 10))
METHODS = ("tcwa", "stc", "oracle")

FIG1_COLUMNS = ("seed", "anomaly_ratio", "method", "nse", "iterations", "converged")
CURVE_COLUMNS = ("rate", "method", "mean_nse", "std_nse", "trials")
CURVE_TRIAL_COLUMNS = ("rate", "method", "seed", "nse", "iterations", "converged")
POINT_COLUMNS = ("seed", "method", "rp_i", "rp_j", "true_x", "true_y", "est_x", "est_y", "error_m")
SUMMARY_COLUMNS = ("seed", "method", "p80_m", "mean_m", "points")
CDF_COLUMNS = ("method", "error_m", "fraction")


@dataclass
class ExperimentReport:
    """Config echo plus result rows (aggregate), per-trial detail rows, and
    auxiliary tables keyed by name (e.g. pooled CDFs)."""

    config: dict
    rows: list = field(default_factory=list)
    detail: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)

    def to_json(self, path):
        doc = {"config": self.config, "rows": self.rows, "detail": self.detail,
               "tables": self.tables}
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, columns, rows):
    """Write dict rows to CSV with a fixed column schema."""
    with open(path, "w") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[c]) for c in columns) + "\n")


def _solver_config(method, solver_kw):
    return SolverConfig(baseline=method, **(solver_kw or {}))


def _run_cell(truth, corrupted, anomaly, omega, method, solver_kw):
    m = apply_mask(corrupted, omega)
    t0 = time.perf_counter()
    res = solve(m, omega, _solver_config(method, solver_kw), anomaly_truth=anomaly)
    wall = time.perf_counter() - t0
    return nse(res.x_hat, truth, omega), res, wall


def _make_instance(dims, rank, lo, hi, rate, ratio, magnitude, seed, mode="tube"):
    """Truth, corrupted, anomaly tensor and mask for one seeded trial."""
    n1, n2, n3 = dims
    truth = generate_low_tubal_rank(n1, n2, n3, rank, lo, hi, seed=seed).values
    if ratio > 0:
        spec = AnomalySpec(ratio=ratio, magnitude=magnitude, mode=mode, seed=seed + 777)
        corrupted, anomaly = inject_anomalies(truth, spec)
    else:
        corrupted, anomaly = truth, np.zeros_like(truth)
    omega = sample_uniform_tubes(n1, n2, rate, seed=seed + 13)
    return truth, corrupted, anomaly, omega


def run_fig1_study(dims=(40, 40, 10), rank=3, rate=0.4, lo=0.0, hi=100.0,
                   ratios=(0.0, 0.01, 0.05), magnitude=100.0,
                   anomaly_mode="tube", trials=5, base_seed=0, solver_kw=None):
    """Completion error under growing anomaly contamination.

    Every condition is solved with stc (anomalies unhandled); the largest
    ratio additionally gets a tcwa row, the robust counterpart.
    """
    config = dict(study="fig1", dims=list(dims), rank=rank, rate=rate, lo=lo,
                  hi=hi, ratios=list(ratios), magnitude=magnitude,
                  anomaly_mode=anomaly_mode, trials=trials, base_seed=base_seed,
                  solver_kw=dict(solver_kw or {}))
    report = ExperimentReport(config=config)
    for t in range(trials):
        seed = base_seed + t
        for ratio in ratios:
            truth, corrupted, anomaly, omega = _make_instance(
                dims, rank, lo, hi, rate, ratio, magnitude, seed, anomaly_mode)
            methods = ("stc", "tcwa") if ratio == max(ratios) else ("stc",)
            for method in methods:
                err, res, wall = _run_cell(truth, corrupted, anomaly, omega, method, solver_kw)
                report.rows.append({
                    "seed": seed, "anomaly_ratio": ratio, "method": method,
                    "nse": err, "iterations": res.iterations,
                    "converged": res.converged, "wall_time_s": wall,
                })
    return report


def run_recovery_curve(dims=(40, 40, 10), rank=3, lo=0.0, hi=100.0,
                       anomaly_ratio=0.05, magnitude=100.0,
                       anomaly_mode="tube", rates=CURVE_RATES,
                       methods=METHODS, trials=5, base_seed=0, solver_kw=None):
    """Mean NSE per (sampling rate, method) over seeded trials.

    Methods within a cell share the trial's data, mask and anomalies, so
    cross-method comparisons are paired.
    """
    config = dict(study="curve", dims=list(dims), rank=rank, lo=lo, hi=hi,
                  anomaly_ratio=anomaly_ratio, magnitude=magnitude,
                  anomaly_mode=anomaly_mode, rates=list(rates),
                  methods=list(methods), trials=trials, base_seed=base_seed,
                  solver_kw=dict(solver_kw or {}))
    report = ExperimentReport(config=config)
    for ri, rate in enumerate(rates):
        cells = {method: [] for method in methods}
        for t in range(trials):
            seed = base_seed + 100 * ri + t
            truth, corrupted, anomaly, omega = _make_instance(
                dims, rank, lo, hi, rate, anomaly_ratio, magnitude, seed,
                anomaly_mode)
            for method in methods:
                err, res, wall = _run_cell(truth, corrupted, anomaly, omega, method, solver_kw)
                cells[method].append(err)
                report.detail.append({
                    "rate": rate, "method": method, "seed": seed, "nse": err,
                    "iterations": res.iterations, "converged": res.converged,
                    "wall_time_s": wall,
                })
        for method in methods:
            errs = np.array(cells[method])
            report.rows.append({
                "rate": rate, "method": method,
                "mean_nse": float(errs.mean()), "std_nse": float(errs.std()),
                "trials": trials,
            })
    return report


def run_localization_eval(dims=(40, 40, 10), rank=3, rate=0.2, lo=-100.0,
                          hi=-40.0, anomaly_ratio=0.05, magnitude=None,
                          anomaly_mode="tube", k=3, test_points=200,
                          noise_sigma=0.0, spacing=1.0, trials=5, base_seed=0,
                          methods=METHODS, solver_kw=None):
    """KNN positioning accuracy on maps recovered by each method.

    Test points are held-out (unsampled) reference points; queries are their
    ground-truth fingerprints plus optional Gaussian noise, shared across
    methods.  Reports per-point errors, per-trial 80th percentiles, and the
    pooled error CDF per method.
    """
    if magnitude is None:
        magnitude = hi - lo
    config = dict(study="localize", dims=list(dims), rank=rank, rate=rate,
                  lo=lo, hi=hi, anomaly_ratio=anomaly_ratio,
                  magnitude=magnitude, anomaly_mode=anomaly_mode, k=k,
                  test_points=test_points,
                  noise_sigma=noise_sigma, spacing=spacing, trials=trials,
                  base_seed=base_seed, methods=list(methods),
                  solver_kw=dict(solver_kw or {}))
    report = ExperimentReport(config=config)
    pooled = {method: [] for method in methods}
    for t in range(trials):
        seed = base_seed + t
        truth, corrupted, anomaly, omega = _make_instance(
            dims, rank, lo, hi, rate, anomaly_ratio, magnitude, seed,
            anomaly_mode)
        truth_map = RadioMap(truth, spacing=spacing)

        heldout = np.argwhere(~omega.flags)
        npts = min(test_points, len(heldout))
        pick = np.random.default_rng(seed + 31).choice(len(heldout), size=npts, replace=False)
        points = heldout[np.sort(pick)]
        noise_rng = np.random.default_rng(seed + 57)
        queries = [truth[i, j, :].copy() for i, j in points]
        if noise_sigma > 0:
            queries = [q + noise_rng.normal(0.0, noise_sigma, size=q.size) for q in queries]

        for method in methods:
            _, res, wall = _run_cell(truth, corrupted, anomaly, omega, method, solver_kw)
            rmap = RadioMap(res.x_hat, spacing=spacing)
            errs = []
            for (i, j), q in zip(points, queries):
                est = knn_localize(rmap, q, k)
                err = localization_error(est, truth_map.rp_coords(i, j))
                errs.append(err)
                report.detail.append({
                    "seed": seed, "method": method, "rp_i": int(i), "rp_j": int(j),
                    "true_x": truth_map.rp_coords(i, j)[0],
                    "true_y": truth_map.rp_coords(i, j)[1],
                    "est_x": est.position[0], "est_y": est.position[1],
                    "error_m": err,
                })
            pooled[method].extend(errs)
            cdf = error_cdf(errs)
            report.rows.append({
                "seed": seed, "method": method,
                "p80_m": cdf_percentile(cdf, 0.8),
                "mean_m": float(np.mean(errs)), "points": npts,
                "wall_time_s": wall,
            })
    report.tables["pooled_cdf"] = {
        method: error_cdf(errs) for method, errs in pooled.items() if errs
    }
    return report


def write_fig1_report(report, outdir):
    write_csv(outdir / "fig1.csv", FIG1_COLUMNS, report.rows)
    report.to_json(outdir / "fig1.json")


def write_curve_report(report, outdir):
    write_csv(outdir / "curve.csv", CURVE_COLUMNS, report.rows)
    write_csv(outdir / "curve_trials.csv", CURVE_TRIAL_COLUMNS, report.detail)
    report.to_json(outdir / "curve.json")


def write_localization_report(report, outdir):
    write_csv(outdir / "localize_points.csv", POINT_COLUMNS, report.detail)
    write_csv(outdir / "localize_summary.csv", SUMMARY_COLUMNS, report.rows)
    cdf_rows = [
        {"method": method, "error_m": e, "fraction": f}
        for method, cdf in report.tables.get("pooled_cdf", {}).items()
        for e, f in cdf
    ]
    write_csv(outdir / "localize_cdf.csv", CDF_COLUMNS, cdf_rows)
    report.to_json(outdir / "localize.json")
