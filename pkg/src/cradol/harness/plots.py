"""Figure rendering for learning curves, sweeps, and option diagnostics.

All figures go to vector files (SVG by default) next to the CSV output.
Rendering is deterministic: fixed hash salt, no embedded timestamps.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams.update(
    {
        "svg.hashsalt": "cradol",
        "figure.figsize": (6.0, 3.8),
        "figure.dpi": 110,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "axes.spines.top": False,
        "axes.spines.right": False,
        "font.size": 9,
    }
)

import matplotlib.pyplot as plt
import numpy as np

_SAVE_KW = {"bbox_inches": "tight", "metadata": {"Date": None}}


def _curve_matrix(per_seed_rows):
    """Stack per-seed curves; truncate to the shortest if lengths differ."""
    n = min(len(rows) for rows in per_seed_rows)
    steps = np.array([r.env_step for r in per_seed_rows[0][:n]])
    vals = np.stack([[r.mean_return for r in rows[:n]] for rows in per_seed_rows])
    return steps, vals


def save_learning_curves(curves_by_label: dict, path, title=None, ylabel="mean eval return"):
    """Mean line per label with a 95% interval band across seeds."""
    fig, ax = plt.subplots()
    for label, per_seed in curves_by_label.items():
        steps, vals = _curve_matrix(per_seed)
        mean = vals.mean(axis=0)
        (line,) = ax.plot(steps, mean, label=label)
        n = vals.shape[0]
        if n > 1:
            half = 1.96 * vals.std(axis=0) / np.sqrt(n)
            ax.fill_between(steps, mean - half, mean + half, alpha=0.2, color=line.get_color())
    ax.set_xlabel("environment steps")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(loc="best")
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def save_bandit_sweep(table, path, title="area under the curve by goal count"):
    """table rows: (algorithm, goal_count, auc_mean, auc_halfwidth)."""
    fig, ax = plt.subplots()
    algorithms = sorted({row[0] for row in table})
    for alg in algorithms:
        rows = sorted((r for r in table if r[0] == alg), key=lambda r: r[1])
        xs = [r[1] for r in rows]
        ys = [r[2] for r in rows]
        errs = [r[3] for r in rows]
        ax.errorbar(xs, ys, yerr=errs, marker="o", capsize=3, label=alg)
    ax.set_xlabel("number of goals")
    ax.set_ylabel("AUC")
    ax.set_xscale("log")
    ax.set_xticks(sorted({row[1] for row in table}))
    ax.get_xaxis().set_major_formatter(matplotlib.ticker.ScalarFormatter())
    ax.set_title(title)
    ax.legend(loc="best")
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def save_mechanism_map(attention, active_sets, path):
    """Heatmap of option-to-mechanism attention with the top-k cells outlined."""
    attention = np.asarray(attention)
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    im = ax.imshow(attention, cmap="viridis", vmin=0.0, vmax=1.0)
    for o, mechs in enumerate(active_sets):
        for m in mechs:
            ax.add_patch(
                plt.Rectangle((m - 0.5, o - 0.5), 1, 1, fill=False, edgecolor="white", lw=1.5)
            )
    ax.set_xlabel("mechanism")
    ax.set_ylabel("option")
    ax.set_xticks(range(attention.shape[1]))
    ax.set_yticks(range(attention.shape[0]))
    fig.colorbar(im, ax=ax, label="attention")
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def save_correlation(matrix, path):
    matrix = np.asarray(matrix)
    fig, ax = plt.subplots(figsize=(3.6, 3.2))
    im = ax.imshow(matrix, cmap="coolwarm", vmin=-1.0, vmax=1.0)
    n = matrix.shape[0]
    for i in range(n):
        for j in range(n):
            val = matrix[i, j]
            ax.text(j, i, "n/a" if np.isnan(val) else f"{val:+.2f}", ha="center", va="center", fontsize=8)
    ax.set_xticks(range(n), [f"option {i}" for i in range(n)])
    ax.set_yticks(range(n), [f"option {i}" for i in range(n)])
    fig.colorbar(im, ax=ax, label="Pearson r")
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def save_option_trajectories(sequences, path):
    """Step-vs-option raster for a handful of greedy episodes."""
    fig, axes = plt.subplots(len(sequences), 1, sharex=True, squeeze=False)
    for ep, (ax, seq) in enumerate(zip(axes[:, 0], sequences)):
        ax.step(range(len(seq)), seq, where="post")
        ax.set_ylabel(f"ep {ep}")
        ax.set_yticks(sorted(set(seq)))
    axes[-1, 0].set_xlabel("step")
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path
