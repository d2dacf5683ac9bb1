"""Command-line interface: synth, sample, recover, localize, curve, fig1.

Arguments and file-format problems exit nonzero; a solver that runs out of
iterations is still a usable result and exits 0 with converged=false in the
report.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .completion import SolverConfig, solve
from .errors import EmptyComplement, TubalmapError
from .localization import nse
from .sampling import (
    AnomalySpec, apply_mask, generate_low_tubal_rank, inject_anomalies,
    sample_uniform_tubes,
)
from .talgebra import tubal_rank
from .tensorfile import read_mask, read_tensor, write_mask, write_tensor


def _parse_dims(text):
    parts = text.lower().split("x")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"dims must look like 40x40x10, got {text!r}")
    try:
        dims = tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must be integers, got {text!r}")
    if any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError("dims must be positive")
    return dims


def _parse_range(text):
    try:
        lo, hi = (float(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"range must look like 0:100, got {text!r}")
    if not lo < hi:
        raise argparse.ArgumentTypeError("range must have lo < hi")
    return lo, hi


def _add_solver_flags(p):
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="sparsity weight (default sqrt(n3/max(n1,n2)))")
    p.add_argument("--mu", type=float, default=None,
                   help="observation penalty (default 2/sigma1, ramped)")
    p.add_argument("--rho", type=float, default=None,
                   help="splitting penalty (default follows mu)")
    p.add_argument("--tol", type=float, default=None, help="convergence tolerance")
    p.add_argument("--max-iters", type=int, default=None, help="iteration cap")


def _solver_kw(args):
    kw = {}
    for name in ("lam", "mu", "rho", "tol"):
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    if getattr(args, "max_iters", None) is not None:
        kw["max_iters"] = args.max_iters
    return kw


def _add_anomaly_flags(p, default_ratio=0.0):
    p.add_argument("--anomaly-ratio", type=float, default=default_ratio,
                   help="fraction of corrupted tubes (or entries)")
    p.add_argument("--anomaly-mode", choices=("tube", "entry"), default="tube")
    p.add_argument("--anomaly-mag", type=float, default=None,
                   help="corruption amplitude (default: data range)")


def _outdir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_synth(args):
    out = _outdir(args)
    n1, n2, n3 = args.dims
    lo, hi = args.range
    syn = generate_low_tubal_rank(n1, n2, n3, args.rank, lo, hi, seed=args.seed)
    prov = (f"synth:dims={n1}x{n2}x{n3},rank={args.rank},"
            f"range={lo:g}:{hi:g},seed={args.seed}")
    write_tensor(out / "truth.tns", syn.values, seed_provenance=prov)
    meta = {
        "dims": [n1, n2, n3], "rank_requested": args.rank,
        "rank_measured": syn.rank_measured, "lo": lo, "hi": hi,
        "seed": args.seed, "anomaly": None,
        "files": {"truth": "truth.tns"},
    }
    if args.anomaly_ratio > 0:
        mag = args.anomaly_mag if args.anomaly_mag is not None else hi - lo
        spec = AnomalySpec(ratio=args.anomaly_ratio, magnitude=mag,
                           mode=args.anomaly_mode, seed=args.seed + 777)
        corrupted, anomaly = inject_anomalies(syn.values, spec)
        write_tensor(out / "anomaly.tns", anomaly,
                     seed_provenance=prov + f",anomaly={spec.ratio:g}:{spec.mode}:{mag:g}")
        write_tensor(out / "corrupted.tns", corrupted,
                     seed_provenance=prov + f",anomaly={spec.ratio:g}:{spec.mode}:{mag:g}")
        meta["anomaly"] = {"ratio": spec.ratio, "mode": spec.mode,
                           "magnitude": mag, "seed": spec.seed}
        meta["files"]["anomaly"] = "anomaly.tns"
        meta["files"]["corrupted"] = "corrupted.tns"
    with open(out / "meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {out}/truth.tns (measured tubal rank {syn.rank_measured})")
    if meta["anomaly"]:
        print(f"wrote {out}/anomaly.tns and {out}/corrupted.tns")
    return 0


def cmd_sample(args):
    out = _outdir(args)
    n1, n2, _ = args.dims
    mask = sample_uniform_tubes(n1, n2, args.rate, seed=args.seed)
    write_mask(out / "mask.json", mask)
    print(f"wrote {out}/mask.json ({mask.count} of {n1 * n2} tubes)")
    return 0


def cmd_recover(args, parser):
    out = _outdir(args)
    data, _ = read_tensor(args.input)
    n1, n2, n3 = data.shape

    if args.mask is not None:
        omega = read_mask(args.mask)
        if omega.flags.shape != (n1, n2):
            parser.error(f"mask is {omega.flags.shape[0]}x{omega.flags.shape[1]}, "
                         f"tensor needs {n1}x{n2}")
    elif args.rate is not None:
        omega = sample_uniform_tubes(n1, n2, args.rate, seed=args.seed)
    else:
        parser.error("recover needs --mask FILE or --rate F")

    anomaly = None
    if args.anomaly_truth is not None:
        anomaly, _ = read_tensor(args.anomaly_truth)
    elif args.method == "oracle":
        parser.error("--method oracle needs --anomaly-truth FILE")

    m = apply_mask(data, omega)
    cfg = SolverConfig(baseline=args.method, **_solver_kw(args))
    res = solve(m, omega, cfg, anomaly_truth=anomaly)

    prov = f"recover:method={args.method},seed={args.seed}"
    write_tensor(out / "x_hat.tns", res.x_hat, seed_provenance=prov)
    files = {"x_hat": "x_hat.tns"}
    if args.method == "tcwa":
        write_tensor(out / "y_hat.tns", res.y_hat, seed_provenance=prov)
        files["y_hat"] = "y_hat.tns"

    err = None
    if args.truth is not None:
        truth, _ = read_tensor(args.truth)
        try:
            err = nse(res.x_hat, truth, omega)
            print(f"NSE: {err:.6e}")
        except EmptyComplement:
            print("NSE: n/a (no unsampled tubes)")

    last = res.history[-1]
    report = {
        "method": args.method, "iterations": res.iterations,
        "converged": res.converged, "nse": err,
        "feasibility": last.feasibility, "splitting": last.splitting,
        "objective": last.objective, "files": files,
    }
    with open(out / "recover.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")

    from .figures import plot_convergence
    plot_convergence(res.history, out / "convergence.png")
    status = "converged" if res.converged else "max iterations"
    print(f"wrote {out}/x_hat.tns ({status} after {res.iterations} iterations)")
    return 0


def cmd_curve(args):
    out = _outdir(args)
    lo, hi = args.range
    mag = args.anomaly_mag if args.anomaly_mag is not None else hi - lo
    report = experiments.run_recovery_curve(
        dims=args.dims, rank=args.rank, lo=lo, hi=hi,
        anomaly_ratio=args.anomaly_ratio, magnitude=mag,
        anomaly_mode=args.anomaly_mode, trials=args.trials,
        base_seed=args.seed, solver_kw=_solver_kw(args))
    experiments.write_curve_report(report, out)
    from .figures import plot_curve
    plot_curve(report, out / "curve.png")
    print(f"wrote {out}/curve.csv, curve_trials.csv, curve.json, curve.png")
    return 0


def cmd_fig1(args):
    out = _outdir(args)
    lo, hi = args.range
    mag = args.anomaly_mag if args.anomaly_mag is not None else hi - lo
    report = experiments.run_fig1_study(
        dims=args.dims, rank=args.rank, rate=args.rate, lo=lo, hi=hi,
        magnitude=mag, anomaly_mode=args.anomaly_mode, trials=args.trials,
        base_seed=args.seed, solver_kw=_solver_kw(args))
    experiments.write_fig1_report(report, out)
    from .figures import plot_fig1
    plot_fig1(report, out / "fig1.png")
    print(f"wrote {out}/fig1.csv, fig1.json, fig1.png")
    return 0


def cmd_localize(args):
    out = _outdir(args)
    lo, hi = args.range
    report = experiments.run_localization_eval(
        dims=args.dims, rank=args.rank, rate=args.rate, lo=lo, hi=hi,
        anomaly_ratio=args.anomaly_ratio, magnitude=args.anomaly_mag,
        anomaly_mode=args.anomaly_mode, k=args.k,
        test_points=args.test_points, noise_sigma=args.noise_sigma,
        trials=args.trials, base_seed=args.seed, solver_kw=_solver_kw(args))
    experiments.write_localization_report(report, out)
    from .figures import plot_localization_cdf
    plot_localization_cdf(report, out / "cdf.png")
    for method in report.config["methods"]:
        p80s = [r["p80_m"] for r in report.rows if r["method"] == method]
        print(f"{method}: mean 80th-percentile error {np.mean(p80s):.3f} m")
    print(f"wrote {out}/localize_points.csv, localize_summary.csv, "
          f"localize_cdf.csv, localize.json, cdf.png")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tubalmap",
        description="Robust tensor completion for RF radio maps and KNN localization.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic low-tubal-rank map")
    p.add_argument("--dims", type=_parse_dims, default=(40, 40, 10))
    p.add_argument("--rank", type=int, default=3)
    p.add_argument("--range", type=_parse_range, default=(0.0, 100.0))
    p.add_argument("--seed", type=int, default=0)
    _add_anomaly_flags(p)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("sample", help="draw a uniform tube-sampling mask")
    p.add_argument("--dims", type=_parse_dims, default=(40, 40, 10))
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("recover", help="complete a partially observed tensor")
    p.add_argument("--input", required=True, help="observed/corrupted tensor file")
    p.add_argument("--mask", default=None, help="mask JSON file")
    p.add_argument("--rate", type=float, default=None,
                   help="draw a mask at this rate instead of --mask")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=experiments.METHODS, default="tcwa")
    p.add_argument("--truth", default=None, help="ground-truth tensor for NSE")
    p.add_argument("--anomaly-truth", default=None,
                   help="true anomaly tensor (required for --method oracle)")
    _add_solver_flags(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("curve", help="NSE vs sampling rate for all methods")
    p.add_argument("--dims", type=_parse_dims, default=(40, 40, 10))
    p.add_argument("--rank", type=int, default=3)
    p.add_argument("--range", type=_parse_range, default=(0.0, 100.0))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=5)
    _add_anomaly_flags(p, default_ratio=0.05)
    _add_solver_flags(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("fig1", help="recovery error under 0/1/5%% anomalies")
    p.add_argument("--dims", type=_parse_dims, default=(40, 40, 10))
    p.add_argument("--rank", type=int, default=3)
    p.add_argument("--rate", type=float, default=0.4)
    p.add_argument("--range", type=_parse_range, default=(0.0, 100.0))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--anomaly-mode", choices=("tube", "entry"), default="tube")
    p.add_argument("--anomaly-mag", type=float, default=None)
    _add_solver_flags(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("localize", help="KNN positioning on recovered maps")
    p.add_argument("--dims", type=_parse_dims, default=(40, 40, 10))
    p.add_argument("--rank", type=int, default=3)
    p.add_argument("--rate", type=float, default=0.2)
    p.add_argument("--range", type=_parse_range, default=(-100.0, -40.0))
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--test-points", type=int, default=200)
    p.add_argument("--noise-sigma", type=float, default=0.0,
                   help="Gaussian noise added to query fingerprints")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=5)
    _add_anomaly_flags(p, default_ratio=0.05)
    _add_solver_flags(p)
    p.add_argument("--out", required=True)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "synth":
            return cmd_synth(args)
        if args.command == "sample":
            return cmd_sample(args)
        if args.command == "recover":
            return cmd_recover(args, parser)
        if args.command == "curve":
            return cmd_curve(args)
        if args.command == "fig1":
            return cmd_fig1(args)
        if args.command == "localize":
            return cmd_localize(args)
    except (OSError, TubalmapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    parser.error(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
