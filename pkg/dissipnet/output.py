"""CSV tables and static SVG figures.

Files are byte-stable for identical inputs: floats are printed in their
shortest round-trip positional form and SVG output carries a fixed hash salt
and no date.
"""

import csv
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

import matplotlib as mpl
import numpy as np
from matplotlib.figure import Figure

from dissipnet.config import NAME
from dissipnet.log import logger

mpl.rcParams["svg.hashsalt"] = NAME.lower()
mpl.rcParams["svg.fonttype"] = "none"
FIGSIZE = (6.4, 4.4)


def format_value(value) -> str:
    if isinstance(value, bool | np.bool_):
        return str(int(value))
    if isinstance(value, int | np.integer):
        return str(int(value))
    if isinstance(value, float | np.floating):
        return np.format_float_positional(float(value), trim="0")
    return str(value)


def emit_csv(columns: Sequence[str], rows: Iterable[Sequence], path: Path) -> Path:
    """Write a header row plus one line per row, line feed terminated."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        count = 0
        for row in rows:
            if len(row) != len(columns):
                msg = f"Row of length {len(row)} does not match {len(columns)} columns"
                raise ValueError(msg)
            writer.writerow([format_value(value) for value in row])
            count += 1
    logger.verbose(f"Wrote {count} rows to {path}")
    return path


@dataclass(frozen=True)
class LinePlot:
    x: Sequence[float]
    series: Mapping[str, Sequence[float]]
    xlabel: str
    ylabel: str
    title: str = ""
    logx: bool = False
    logy: bool = False


@dataclass(frozen=True)
class Heatmap:
    x: Sequence[float]
    y: Sequence[float]
    values: np.ndarray
    xlabel: str
    ylabel: str
    title: str = ""
    colorbar: str = "concurrence"
    logx: bool = False


def _draw_lines(figure: Figure, plot: LinePlot) -> None:
    ax = figure.add_subplot()
    for label, values in plot.series.items():
        ax.plot(plot.x, values, marker="o", markersize=3, label=label)
    if plot.logx:
        ax.set_xscale("log")
    if plot.logy:
        ax.set_yscale("log")
    ax.set_xlabel(plot.xlabel)
    ax.set_ylabel(plot.ylabel)
    ax.grid(visible=True, alpha=0.3)
    if plot.series:
        ax.legend(loc="best")
    if plot.title:
        ax.set_title(plot.title)


def _draw_heatmap(figure: Figure, plot: Heatmap) -> None:
    ax = figure.add_subplot()
    mesh = ax.pcolormesh(plot.x, plot.y, np.asarray(plot.values).T, shading="nearest", cmap="viridis")
    figure.colorbar(mesh, ax=ax, label=plot.colorbar)
    if plot.logx:
        ax.set_xscale("log")
    ax.set_xlabel(plot.xlabel)
    ax.set_ylabel(plot.ylabel)
    if plot.title:
        ax.set_title(plot.title)


def emit_svg_plot(plot: LinePlot | Heatmap, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    figure = Figure(figsize=FIGSIZE, layout="constrained")
    if isinstance(plot, Heatmap):
        _draw_heatmap(figure, plot)
    else:
        _draw_lines(figure, plot)
    figure.savefig(path, format="svg", metadata={"Date": None})
    logger.verbose(f"Wrote figure {path}")
    return path
