"""Figures rendered next to the delimited report output.

The plot picked depends on the grid shape: a per-run metric chart for a
single point, a heatmap for a two-way sweep, and mean +/- std curves for a
one-way sweep (which is what a corruption curve is). Everything draws on the
Agg backend, so no display is needed.
"""

from __future__ import annotations

import os

import numpy as np

from .experiment import METRIC_NAMES, RunReport

__all__ = ["render_report_figures"]


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def _swept_keys(report: RunReport) -> list:
    keys = []
    for key in ("lambda", "eta", "kernel_kind", "snr_db", "ratio"):
        values = {repr(e["params"][key]) for e in report.grid}
        if len(values) > 1:
            keys.append(key)
    return keys


def _single_point_figure(report: RunReport, path: str) -> None:
    plt = _pyplot()
    runs = [r for r in report.grid[0]["runs"] if "failed" not in r]
    agg = report.grid[0]["aggregate"]
    fig, ax = plt.subplots(figsize=(7, 4))
    x = np.arange(len(runs))
    width = 0.2
    for off, name in enumerate(METRIC_NAMES):
        ax.bar(x + (off - 1.5) * width, [r[name] for r in runs], width, label=name.upper())
        mean = agg[f"{name}_mean"]
        if mean is not None:
            ax.axhline(mean, color=f"C{off}", linestyle=":", linewidth=0.8)
    ax.set_xticks(x)
    ax.set_xticklabels([str(r["run_index"]) for r in runs])
    ax.set_xlabel("run")
    ax.set_ylabel("score")
    ax.set_ylim(0.0, 1.05)
    ax.legend(ncol=4, fontsize="small")
    ax.set_title("per-run clustering scores (dotted lines: means)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _curve_figure(report: RunReport, key: str, path: str) -> None:
    plt = _pyplot()
    entries = sorted(report.grid, key=lambda e: e["params"][key])
    xs = [e["params"][key] for e in entries]
    numeric = all(isinstance(v, (int, float)) for v in xs)
    pos = xs if numeric else np.arange(len(xs))
    fig, ax = plt.subplots(figsize=(7, 4))
    for name in METRIC_NAMES:
        means = np.array([e["aggregate"][f"{name}_mean"] for e in entries], dtype=float)
        stds = np.array([e["aggregate"][f"{name}_std"] for e in entries], dtype=float)
        ax.errorbar(pos, means, yerr=stds, marker="o", capsize=3, label=name.upper())
    if not numeric:
        ax.set_xticks(pos)
        ax.set_xticklabels([str(v) for v in xs])
    if numeric and key == "lambda":
        ax.set_xscale("log")
    ax.set_xlabel(key)
    ax.set_ylabel("score (mean +/- std)")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(ncol=4, fontsize="small")
    ax.set_title(f"clustering scores across {key}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _heatmap_figure(report: RunReport, key_y: str, key_x: str, path: str) -> None:
    plt = _pyplot()
    ys = sorted({e["params"][key_y] for e in report.grid})
    xs = sorted({e["params"][key_x] for e in report.grid})
    grid = np.full((len(ys), len(xs)), np.nan)
    for e in report.grid:
        i = ys.index(e["params"][key_y])
        j = xs.index(e["params"][key_x])
        mean = e["aggregate"]["ac_mean"]
        grid[i, j] = np.nan if mean is None else mean
    fig, ax = plt.subplots(figsize=(7, 5))
    im = ax.imshow(grid, origin="lower", aspect="auto", vmin=0.0, vmax=1.0, cmap="viridis")
    ax.set_xticks(np.arange(len(xs)))
    ax.set_xticklabels([f"{v:g}" if isinstance(v, (int, float)) else str(v) for v in xs],
                       rotation=45, ha="right", fontsize="small")
    ax.set_yticks(np.arange(len(ys)))
    ax.set_yticklabels([f"{v:g}" if isinstance(v, (int, float)) else str(v) for v in ys],
                       fontsize="small")
    ax.set_xlabel(key_x)
    ax.set_ylabel(key_y)
    ax.set_title("mean accuracy over the sweep")
    fig.colorbar(im, ax=ax, label="mean AC")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_report_figures(report: RunReport, out_dir: str) -> list:
    """Write the figures that fit the report's grid shape; returns their paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    swept = _swept_keys(report)
    if len(report.grid) == 1:
        path = os.path.join(out_dir, "metrics.png")
        _single_point_figure(report, path)
        written.append(path)
    elif len(swept) == 2:
        path = os.path.join(out_dir, "sweep_heatmap.png")
        _heatmap_figure(report, swept[0], swept[1], path)
        written.append(path)
    elif len(swept) == 1:
        path = os.path.join(out_dir, "sweep_curve.png")
        _curve_figure(report, swept[0], path)
        written.append(path)
    else:
        # three or more swept keys: fall back to score-vs-grid-index curves
        path = os.path.join(out_dir, "sweep_curve.png")
        plt = _pyplot()
        fig, ax = plt.subplots(figsize=(7, 4))
        for name in METRIC_NAMES:
            means = [e["aggregate"][f"{name}_mean"] for e in report.grid]
            ax.plot(range(len(report.grid)), means, marker="o", label=name.upper())
        ax.set_xlabel("grid index")
        ax.set_ylabel("score (mean)")
        ax.legend(ncol=4, fontsize="small")
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written
