"""Figure rendering for the report-producing CLI paths.

Each writer takes the already-computed records and draws a PNG next to the
delimited output.  Rendering is headless (Agg) and deterministic: fixed
figure sizes, fixed dpi, and pinned PNG metadata.
"""

from __future__ import annotations

from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVE_KW = {"dpi": 150, "metadata": {"Software": "autocrat"}}


def plot_heatmap(records: Sequence, path: str, title: Optional[str] = None) -> None:
    """Threshold heatmap over the (r, theta) grid; non-enforceable cells are
    blanked and cells whose optimal anchors are non-pure are outlined."""
    rs = sorted({rec.r for rec in records})
    thetas = sorted({rec.theta for rec in records})
    r_idx = {v: i for i, v in enumerate(rs)}
    t_idx = {v: i for i, v in enumerate(thetas)}
    lam = np.full((len(rs), len(thetas)), np.nan)
    mixed = np.zeros_like(lam)
    for rec in records:
        i, j = r_idx[rec.r], t_idx[rec.theta]
        if rec.enforceable and rec.lambda_min is not None:
            lam[i, j] = rec.lambda_min
        mixed[i, j] = 1.0 if rec.mixed_optimizer else 0.0

    fig, ax = plt.subplots(figsize=(7, 5))
    extent = (min(thetas), max(thetas), min(rs), max(rs))
    im = ax.imshow(lam, origin="lower", aspect="auto", extent=extent, vmin=0.0, vmax=1.0, cmap="viridis")
    if mixed.any() and not mixed.all():
        ax.contour(thetas, rs, mixed, levels=[0.5], colors="white", linestyles="dashed", linewidths=1.2)
    fig.colorbar(im, ax=ax, label="minimum discount factor")
    ax.set_xlabel(r"$\theta$ (rad)")
    ax.set_ylabel("r")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_region(points: Sequence, path: str, title: Optional[str] = None) -> None:
    """Scatter of sampled payoff pairs, opponent payoff on the x axis."""
    ys = [pt.pi_y for pt in points]
    xs = [pt.pi_x for pt in points]
    fig, ax = plt.subplots(figsize=(5.5, 5))
    ax.scatter(ys, xs, s=9, alpha=0.6, edgecolors="none")
    ax.set_xlabel(r"$\pi_Y$")
    ax.set_ylabel(r"$\pi_X$")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_trace(trace, path: str, title: Optional[str] = None) -> None:
    """Mixing weight and per-round objective value along one trace."""
    t = np.arange(trace.horizon)
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    ax1.step(t, trace.p, where="post")
    ax1.set_ylabel("weight on upper action")
    ax1.set_ylim(-0.05, 1.05)
    ax2.step(t, trace.phi, where="post")
    ax2.set_ylabel("objective value")
    ax2.set_xlabel("round")
    for ax in (ax1, ax2):
        ax.grid(True, alpha=0.3)
    if title:
        ax1.set_title(title)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
