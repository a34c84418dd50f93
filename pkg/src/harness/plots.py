"""
SVG figures for the benchmark experiments.

Figures are rendered with the Agg backend. In deterministic mode the SVG
'Date' metadata is dropped and the element-id salt is fixed, so reruns
produce identical files.
"""

from __future__ import annotations

from pathlib import Path
from typing import List, Mapping, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from config.settings import OUTPUT_SETTINGS  # noqa: E402

# (label, times, values)
Series = Tuple[str, np.ndarray, np.ndarray]


def _save(fig, path, deterministic: bool) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    metadata = {'Date': None} if deterministic else {}
    with plt.rc_context({'svg.hashsalt': OUTPUT_SETTINGS['svg_hashsalt'] if deterministic else None}):
        fig.savefig(path, format="svg", metadata=metadata)
    plt.close(fig)
    return path


def _positive(values: np.ndarray) -> np.ndarray:
    # log axes cannot show exact zeros
    return np.maximum(np.asarray(values, dtype=float), np.finfo(float).tiny)


def plot_error_decay(series: Mapping[str, List[Series]], path,
                     deterministic: bool = True) -> Path:
    """One panel per solver, error to the reference on a log axis."""
    solvers = list(series)
    fig, axes = plt.subplots(1, len(solvers), figsize=(4.8 * len(solvers), 4.0),
                             squeeze=False, constrained_layout=True)
    for ax, solver in zip(axes[0], solvers):
        for label, times, errors in series[solver]:
            ax.semilogy(times, _positive(errors), label=label)
        ax.set_title(solver)
        ax.set_xlabel("t")
        ax.set_ylabel("||x(t) - x_ref||")
        ax.legend(fontsize="small")
    return _save(fig, path, deterministic)


def plot_signal_recovery(x_flow: np.ndarray, x_ref: np.ndarray, x_true: np.ndarray,
                         path, deterministic: bool = True) -> Path:
    fig, ax = plt.subplots(figsize=(9.6, 4.0), constrained_layout=True)
    index = np.arange(len(x_flow))
    for values, label, marker in ((x_true, "x_true", "o"), (x_ref, "x_ref", "s"),
                                  (x_flow, "cappa", "x")):
        _, stems, _ = ax.stem(index, values, label=label, markerfmt=marker, basefmt=" ")
        plt.setp(stems, linewidth=0.6)
    ax.set_xlabel("index")
    ax.legend()
    return _save(fig, path, deterministic)


def plot_wallclock_trials(times: Mapping[str, Sequence[float]], path,
                          deterministic: bool = True) -> Path:
    """Per-trial wall-clock seconds for each solver."""
    fig, ax = plt.subplots(figsize=(7.2, 4.0), constrained_layout=True)
    for solver, values in times.items():
        ax.plot(np.arange(1, len(values) + 1), values, marker=".", linestyle="-", label=solver)
    ax.set_xlabel("trial")
    ax.set_ylabel("wall-clock [s]")
    ax.legend()
    return _save(fig, path, deterministic)


def plot_size_sweep(means: Mapping[str, Sequence[Tuple[int, float]]], path,
                    deterministic: bool = True) -> Path:
    fig, ax = plt.subplots(figsize=(7.2, 4.0), constrained_layout=True)
    for solver, points in means.items():
        n, seconds = zip(*points) if points else ((), ())
        ax.plot(n, seconds, marker="o", label=solver)
    ax.set_xlabel("N")
    ax.set_ylabel("mean wall-clock [s]")
    ax.legend()
    return _save(fig, path, deterministic)


def plot_dt_sweep(series: List[Series], path, deterministic: bool = True) -> Path:
    return plot_error_decay({"cappa": series}, path, deterministic)

