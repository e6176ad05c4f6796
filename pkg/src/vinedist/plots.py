"""Figure rendering for the report paths (written next to the CSV output).

matplotlib is imported lazily with the Agg backend so headless use and
library-only consumers never touch a display.
"""

from __future__ import annotations

import numpy as np


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_gaussian_figure(rows, path) -> None:
    plt = _plt()
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5), sharey=True)
    for ax, kind, xlabel in (
        (axes[0], "mean", "mean shift"),
        (axes[1], "variance", "variance"),
    ):
        sub = [r for r in rows if r["kind"] == kind]
        xs = [r["param"] for r in sub]
        for key, marker in (("l1", "o"), ("w1", "s"), ("vineyard", "^")):
            ax.plot(xs, [r[key] for r in sub], marker=marker, label=key)
        ax.set_xlabel(xlabel)
        ax.grid(alpha=0.3)
    axes[0].set_ylabel("distance")
    axes[0].legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_digits_figure(result, path) -> None:
    plt = _plt()
    names = list(result.matrices)
    fig, axes = plt.subplots(1, len(names), figsize=(4 * len(names), 3.8))
    if len(names) == 1:
        axes = [axes]
    palette = {"six": "tab:blue", "nine": "tab:orange", "seven": "tab:green"}
    for ax, name in zip(axes, names):
        coords = result.embeddings[name]
        for kind, color in palette.items():
            idx = [i for i, lab in enumerate(result.labels) if lab == kind]
            ax.scatter(coords[idx, 0], coords[idx, 1], s=14, c=color, label=kind)
        ax.set_title(f"{name} (stress {result.stress[name]:.2f})")
        ax.set_xticks([])
        ax.set_yticks([])
    axes[0].legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_vineyard_figure(V, path) -> None:
    """Vines drawn in the birth-death plane, shaded by time."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    lo, hi = 0.0, 1.0
    if V.vines:
        pts = np.vstack([v.points[:, 1:] for v in V.vines])
        lo = float(pts.min()) - 0.05 * (np.ptp(pts) + 1e-9)
        hi = float(pts.max()) + 0.05 * (np.ptp(pts) + 1e-9)
    ax.plot([lo, hi], [lo, hi], color="0.6", lw=0.8)
    cmap = plt.get_cmap("viridis")
    for v in V.vines:
        t, x, y = v.points[:, 0], v.points[:, 1], v.points[:, 2]
        for k in range(len(t) - 1):
            ax.plot(x[k : k + 2], y[k : k + 2], color=cmap(float(t[k])), lw=1.4)
        ax.scatter([x[0]], [y[0]], s=18, marker="o" if v.kind[0] == "o" else "*",
                   color=cmap(float(t[0])), zorder=3)
    ax.set_xlabel("birth")
    ax.set_ylabel("death")
    ax.set_title(f"dim {V.dim}, {len(V.vines)} vines")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
