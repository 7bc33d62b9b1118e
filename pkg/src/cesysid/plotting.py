"""Figure rendering for trajectories and MI rankings (matplotlib, Agg backend)."""

from __future__ import annotations

import os

import numpy as np

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
    # fixed metadata keeps repeated renders byte-stable
    "svg.hashsalt": "cesysid",
}


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.savefig(path, metadata={"Software": None} if path.endswith(".png") else None)


def plot_trajectory_3d(traj, path):
    """Phase portrait of the first three state variables."""
    plt = _pyplot()
    if traj.dim < 3:
        raise ValueError("3-d phase portrait needs at least 3 state variables")
    with plt.rc_context(STYLE):
        fig = plt.figure(figsize=(5, 4.5))
        ax = fig.add_subplot(projection="3d")
        s = traj.states
        ax.plot(s[:, 0], s[:, 1], s[:, 2], lw=0.5, color="tab:blue")
        ax.set_xlabel(traj.var_names[0])
        ax.set_ylabel(traj.var_names[1])
        ax.set_zlabel(traj.var_names[2])
        _save(fig, path)
        plt.close(fig)
    return path


def plot_trajectory_2d(traj, path):
    """One panel per state variable against time."""
    plt = _pyplot()
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(traj.dim, 1, figsize=(6, 1.6 * traj.dim + 0.4), sharex=True,
                                 squeeze=False)
        for i, ax in enumerate(axes[:, 0]):
            ax.plot(traj.times, traj.states[:, i], lw=0.7, color="k")
            ax.set_ylabel(traj.var_names[i])
        axes[-1, 0].set_xlabel("t")
        fig.align_ylabels(axes[:, 0])
        _save(fig, path)
        plt.close(fig)
    return path


def plot_mi_bars(report, path):
    """Grouped bars of MI per term, one panel per derivative, library order."""
    plt = _pyplot()
    names = list(report.rankings)
    terms = list(report.metadata.get("terms") or [r.term for r in report.rankings[names[0]]])
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, max(len(names), 1), figsize=(2.6 * max(len(names), 1), 2.8),
                                 sharey=True, squeeze=False)
        for ax, name in zip(axes[0], names):
            by_term = {r.term: r for r in report.rankings[name]}
            vals = [by_term[t].mi_nats if by_term[t].mi_nats is not None else np.nan for t in terms]
            colors = ["tab:red" if (by_term[t].p_value is not None
                                    and by_term[t].p_value <= report.metadata["permutation"]["alpha"])
                      else "tab:gray" for t in terms]
            ax.bar(range(len(terms)), vals, color=colors)
            ax.set_xticks(range(len(terms)), terms, rotation=45)
            ax.axhline(0, color="k", lw=0.5)
            ax.set_title(name)
        axes[0, 0].set_ylabel("MI (nats)")
        _save(fig, path)
        plt.close(fig)
    return path


def render_trajectory_figures(traj, outdir, fmt="png"):
    paths = [plot_trajectory_2d(traj, os.path.join(outdir, f"trajectory_2d.{fmt}"))]
    if traj.dim >= 3:
        paths.insert(0, plot_trajectory_3d(traj, os.path.join(outdir, f"trajectory_3d.{fmt}")))
    return paths


def render_report_figures(report, outdir, fmt="png"):
    return [plot_mi_bars(report, os.path.join(outdir, f"mi_bars.{fmt}"))]
