"""Matplotlib renderings of experiment reports, written straight to files."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

METHOD_STYLE = {
    "tcwa": dict(color="tab:blue", marker="o"),
    "stc": dict(color="tab:orange", marker="s"),
    "oracle": dict(color="tab:green", marker="^"),
}


def _style(method):
    return METHOD_STYLE.get(method, dict(color="tab:gray", marker="x"))


def plot_curve(report, path):
    """Mean NSE versus sampling rate, one line per method."""
    fig, ax = plt.subplots(figsize=(6, 4))
    methods = report.config.get("methods", sorted({r["method"] for r in report.rows}))
    for method in methods:
        pts = [(r["rate"], r["mean_nse"]) for r in report.rows if r["method"] == method]
        if not pts:
            continue
        rates, means = zip(*sorted(pts))
        ax.semilogy(rates, means, label=method, **_style(method))
    ax.set_xlabel("sampling rate")
    ax.set_ylabel("mean NSE (unsampled tubes)")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_fig1(report, path):
    """Recovery error per anomaly condition (mean over seeds, per method)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ratios = sorted({r["anomaly_ratio"] for r in report.rows})
    for method in ("stc", "tcwa"):
        xs, ys = [], []
        for ratio in ratios:
            errs = [r["nse"] for r in report.rows
                    if r["method"] == method and r["anomaly_ratio"] == ratio]
            if errs:
                xs.append(ratio)
                ys.append(np.mean(errs))
        if xs:
            ax.semilogy(xs, ys, label=method, **_style(method))
    ax.set_xlabel("anomaly ratio")
    ax.set_ylabel("mean NSE")
    ax.set_xticks(ratios)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_localization_cdf(report, path):
    """Pooled empirical CDF of localization error per method."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for method, cdf in report.tables.get("pooled_cdf", {}).items():
        errs = [e for e, _ in cdf]
        fracs = [f for _, f in cdf]
        ax.step([0.0] + errs, [0.0] + fracs, where="post", label=method,
                color=_style(method)["color"])
    ax.axhline(0.8, color="gray", linestyle=":", linewidth=1)
    ax.set_xlabel("localization error (m)")
    ax.set_ylabel("fraction of test points")
    ax.set_ylim(0, 1.02)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_convergence(history, path):
    """Residuals and objective across ADMM iterations."""
    fig, ax = plt.subplots(figsize=(6, 4))
    its = np.arange(1, len(history) + 1)
    ax.semilogy(its, [h.feasibility for h in history], label="feasibility")
    ax.semilogy(its, [h.splitting for h in history], label="splitting")
    ax.set_xlabel("iteration")
    ax.set_ylabel("residual")
    ax.grid(True, which="both", alpha=0.3)
    ax2 = ax.twinx()
    ax2.plot(its, [h.objective for h in history], color="tab:red", alpha=0.6,
             label="objective")
    ax2.set_ylabel("objective")
    lines, labels = ax.get_legend_handles_labels()
    lines2, labels2 = ax2.get_legend_handles_labels()
    ax.legend(lines + lines2, labels + labels2, loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
