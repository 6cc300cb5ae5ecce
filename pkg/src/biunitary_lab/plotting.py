"""Optional figures for simulate runs (enabled with --plot).

Only imported when asked for, so the core never needs a display or matplotlib.
"""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _style(ax):
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)


def plot_correlations(grid, path, title=None):
    """|C(x, y, t)| as a spacetime map, relative position y - x on the horizontal axis."""
    vals = np.abs(grid.values)
    rel = np.array(grid.ys) - grid.x
    order = np.argsort(rel)
    fig, ax = plt.subplots(figsize=(5, 3.2))
    im = ax.imshow(vals[:, order], origin="lower", aspect="auto", cmap="magma",
                   extent=(rel[order][0] - 0.5, rel[order][-1] + 0.5, -0.5, vals.shape[0] - 0.5))
    ax.set_xlabel("y - x")
    ax.set_ylabel("t")
    if title:
        ax.set_title(title)
    fig.colorbar(im, ax=ax, label="|C|")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_entropies(entropies, path, unit=np.log(2), title=None):
    fig, ax = plt.subplots(figsize=(4, 3))
    for n, s in sorted(entropies.items()):
        label = "von Neumann" if n == 1 else f"n = {n}"
        ax.plot(range(len(s)), np.asarray(s) / unit, marker="o", label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("S / log 2")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    _style(ax)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_series(ys, path, ylabel, log=False, title=None):
    fig, ax = plt.subplots(figsize=(4, 3))
    ys = np.asarray(ys, dtype=float)
    if log:
        ax.semilogy(range(len(ys)), np.maximum(ys, 1e-17), marker="o")
    else:
        ax.plot(range(len(ys)), ys, marker="o")
    ax.set_xlabel("t")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    _style(ax)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
