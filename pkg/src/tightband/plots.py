"""Figure rendering for traces, sweeps, and uniform-convergence profiles.

Everything draws to files through the Agg backend; nothing here opens a
window. Each function takes already-loaded arrays or report rows and
returns the path it wrote, so the CLI report path can stay a thin loop.
"""

from __future__ import annotations

import os
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import UcReport


def render_trace(
    out_path: str,
    day: np.ndarray,
    played_lo: np.ndarray,
    played_hi: np.ndarray,
    y: np.ndarray,
    covered: np.ndarray,
    reset: np.ndarray,
) -> str:
    """Band of played intervals with observations and reset marks."""
    fig, (ax, axw) = plt.subplots(
        2, 1, figsize=(9, 6), sharex=True, height_ratios=[3, 1], constrained_layout=True
    )
    ax.fill_between(day, played_lo, played_hi, color="tab:blue", alpha=0.25, linewidth=0)
    ax.plot(day, played_lo, color="tab:blue", linewidth=0.7)
    ax.plot(day, played_hi, color="tab:blue", linewidth=0.7)
    hit = covered.astype(bool)
    ax.plot(day[hit], y[hit], ".", color="tab:gray", markersize=2, label="covered")
    if (~hit).any():
        ax.plot(day[~hit], y[~hit], "x", color="tab:red", markersize=4, label="missed")
    for d in day[reset.astype(bool)]:
        ax.axvline(d, color="tab:orange", alpha=0.5, linewidth=0.8)
    ax.set_ylabel("value")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title("played interval band (vertical lines mark resets)")
    axw.plot(day, played_hi - played_lo, color="tab:blue", linewidth=0.9)
    axw.set_ylabel("volume")
    axw.set_xlabel("day")
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_sweep(
    out_path: str,
    labels: Sequence[str],
    coverage_mean: np.ndarray,
    coverage_std: np.ndarray,
    volume_mean: np.ndarray,
    volume_std: np.ndarray,
) -> str:
    """Coverage/volume trade-off across sweep cells, one errorbar point each."""
    fig, ax = plt.subplots(figsize=(7, 5), constrained_layout=True)
    ax.errorbar(
        volume_mean,
        coverage_mean,
        xerr=volume_std,
        yerr=coverage_std,
        fmt="o",
        color="tab:blue",
        ecolor="tab:gray",
        capsize=3,
    )
    for x, yv, lab in zip(volume_mean, coverage_mean, labels):
        ax.annotate(lab, (x, yv), textcoords="offset points", xytext=(5, 4), fontsize=7)
    ax.set_xlabel("mean average volume")
    ax.set_ylabel("mean coverage")
    ax.set_title("coverage vs volume across sweep cells")
    ax.grid(True, alpha=0.3)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_uc_profile(out_path: str, reports: Sequence[UcReport]) -> str:
    """q95 deviation against the C*sqrt(ln T / t) envelope, log-log."""
    t = np.array([r.prefix_len for r in reports], dtype=float)
    dev = np.array([r.max_deviation for r in reports])
    bound = np.array([r.bound for r in reports])
    fig, ax = plt.subplots(figsize=(7, 5), constrained_layout=True)
    ax.loglog(t, dev, "o-", color="tab:blue", label="q95 max deviation")
    ax.loglog(t, bound, "--", color="tab:red", label="envelope")
    ax.set_xlabel("prefix length")
    ax.set_ylabel("max interval deviation")
    ax.set_title("uniform convergence profile")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def figure_path(out_dir: str, stem: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, f"{stem}.png")
