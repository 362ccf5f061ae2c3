"""Figures rendered next to the CSV outputs of an experiment."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from . import formats  # noqa: E402

PARAMS = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.2,
    "lines.markersize": 4,
    "figure.figsize": (4.0, 3.0),
    "figure.dpi": 150,
}
# no timestamps or version strings in the PNG, so reruns give identical files
SAVE_KW = {"metadata": {"Software": None}, "bbox_inches": "tight"}


def memory_capacity(summary: list[dict], baseline: float, path: Path) -> Path:
    """Mean champion distance per example count, with standard-deviation bars."""
    n = [r["n_examples"] for r in summary]
    mean = [r["mean_distance_mean"] for r in summary]
    std = [r["mean_distance_std"] for r in summary]
    with plt.rc_context(PARAMS):
        fig, ax = plt.subplots()
        ax.errorbar(n, mean, yerr=std, fmt="o-", color="k", capsize=3, label="evolved champions")
        ax.axhline(baseline, color="r", ls="--", label="random approximator")
        ax.set_xscale("log", base=2)
        ax.set_xticks(n, [str(v) for v in n])
        ax.set_xlabel("number of examples")
        ax.set_ylabel("mean normalised distance")
        ax.set_ylim(0, max(baseline, *(m + s for m, s in zip(mean, std))) * 1.15)
        ax.legend(loc="lower right")
        fig.savefig(path, **SAVE_KW)
        plt.close(fig)
    return path


def fitness_curves(histories: dict[int, list[list]], path: Path) -> Path:
    """Best combined fitness per generation, averaged over runs, one line per series."""
    with plt.rc_context(PARAMS):
        fig, ax = plt.subplots()
        for n, runs in sorted(histories.items()):
            curves = np.array([[r.best_combined for r in h] for h in runs])
            if curves.size == 0:
                continue
            ax.plot(np.arange(curves.shape[1]), curves.mean(axis=0), label=f"{n} examples")
        ax.set_xlabel("generation")
        ax.set_ylabel("best combined fitness")
        ax.legend(loc="lower right")
        fig.savefig(path, **SAVE_KW)
        plt.close(fig)
    return path


def shape_tradeoff(summary: list[dict], path: Path) -> Path:
    n = [r["n_examples"] for r in summary]
    with plt.rc_context(PARAMS):
        fig, ax = plt.subplots()
        ax.errorbar(n, [r["shape_fitness_mean"] for r in summary],
                    yerr=[r["shape_fitness_std"] for r in summary], fmt="s-", capsize=3, color="C0")
        ax.set_xscale("log", base=2)
        ax.set_xticks(n, [str(v) for v in n])
        ax.set_xlabel("number of examples")
        ax.set_ylabel("champion shape fitness")
        fig.savefig(path, **SAVE_KW)
        plt.close(fig)
    return path


def render_report(out: Path) -> list[Path]:
    from .experiment import RANDOM_BASELINE

    out = Path(out)
    fig_dir = out / "figures"
    fig_dir.mkdir(exist_ok=True)
    summary = formats.read_summary(out / "summary.csv")
    histories: dict[int, list] = {}
    for hist in sorted(out.glob("series_*/run_*/history.csv")):
        n = int(hist.parent.parent.name.split("_")[1])
        histories.setdefault(n, []).append(formats.read_history(hist))
    return [
        memory_capacity(summary, RANDOM_BASELINE, fig_dir / "memory_capacity.png"),
        fitness_curves(histories, fig_dir / "fitness_curves.png"),
        shape_tradeoff(summary, fig_dir / "shape_fitness.png"),
    ]
