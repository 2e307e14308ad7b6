"""Figure rendering for run reports, sweeps, and ad-hoc CSV columns.

All figures go through matplotlib's Agg backend with a fixed SVG hash salt
and no date metadata, so rerunning a command reproduces the output bytes.
"""

from __future__ import annotations

import csv

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "influence-game"

import matplotlib.pyplot as plt
import numpy as np

from .errors import ConfigError
from .experiments import RunOutput, SweepResult
from .graph import Graph, Lattice2d


def _save(fig, path) -> None:
    path = str(path)
    if path.endswith(".svg"):
        fig.savefig(path, metadata={"Date": None})
    else:
        fig.savefig(path)
    plt.close(fig)


def plot_csv_columns(input_path, x: str, ys: list[str], output_path) -> None:
    """Line chart of named CSV columns: one line per y column, legend, axes."""
    with open(input_path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        columns = reader.fieldnames or []
        for name in [x, *ys]:
            if name not in columns:
                raise ConfigError(f"column {name!r} not found in {input_path}")
        rows = [row for row in reader]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for y in ys:
        pts = [
            (float(row[x]), float(row[y]))
            for row in rows
            if row[x] != "" and row[y] != ""
        ]
        pts.sort(key=lambda p: p[0])
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o",
                markersize=3, linewidth=1.2, label=y)
    ax.set_xlabel(x)
    ax.set_ylabel(", ".join(ys))
    ax.grid(True, alpha=0.3)
    if ys:
        ax.legend()
    fig.tight_layout()
    _save(fig, output_path)


def timeseries_figure(outputs: list[RunOutput], num_opinions: int, path) -> None:
    """Mean opinion fractions and mean component counts over time."""
    times = [s.t for s in outputs[0].samples]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    for k in range(num_opinions):
        fracs = np.mean(
            [[s.fractions[k] for s in out.samples] for out in outputs], axis=0
        )
        comps = np.mean(
            [[s.components[k] for s in out.samples] for out in outputs], axis=0
        )
        ax1.plot(times, fracs, linewidth=1.2, label=f"opinion {k}")
        ax2.plot(times, comps, linewidth=1.2, label=f"opinion {k}")
    ax1.set_ylabel("fraction of population")
    ax1.grid(True, alpha=0.3)
    ax1.legend()
    ax2.set_xlabel("round")
    ax2.set_ylabel("connected components")
    ax2.grid(True, alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def sweep_figure(result: SweepResult, path) -> None:
    """Non-absorbed fraction (and mean final share of opinion 0) vs value."""
    values = [c.value for c in result.cells]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(
        values,
        [c.frac_not_absorbed for c in result.cells],
        marker="o", markersize=4, linewidth=1.2, label="frac_not_absorbed",
    )
    ax.plot(
        values,
        [c.mean_final_p_a for c in result.cells],
        marker="s", markersize=4, linewidth=1.2, label="mean_final_p_A",
    )
    ax.set_xlabel(result.cells[0].parameter if result.cells else "value")
    ax.set_ylabel("fraction")
    ax.set_ylim(-0.05, 1.05)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def lattice_figure(opinions: np.ndarray, graph: Graph, num_opinions: int, path,
                   title: str = "") -> None:
    """Color-coded lattice state."""
    if not isinstance(graph.kind, Lattice2d):
        raise ConfigError("lattice figure needs a lattice graph")
    rows, cols = graph.kind.rows, graph.kind.cols
    grid = np.asarray(opinions, dtype=np.int8).reshape(rows, cols)
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.imshow(grid, cmap="viridis", vmin=0, vmax=max(num_opinions - 1, 1),
              interpolation="nearest")
    if title:
        ax.set_title(title)
    ax.set_xticks([])
    ax.set_yticks([])
    fig.tight_layout()
    _save(fig, path)
