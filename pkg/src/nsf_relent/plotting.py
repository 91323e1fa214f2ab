"""Deterministic SVG line charts from delimited output files.

Charts are rendered with matplotlib into static SVG.  Byte stability for
identical inputs comes from pinning everything matplotlib would otherwise
vary: the element-id hash salt, the creation-date metadata, and the rc
parameters that affect layout.  Text is emitted as SVG text elements rather
than glyph paths to keep the files small and diffable.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .errors import PlotDataError

__all__ = ["read_csv_columns", "plot_csv"]

_RC = {
    "svg.hashsalt": "nsf-relent",
    "svg.fonttype": "none",
    "figure.figsize": (6.4, 4.0),
    "figure.dpi": 100,
    "font.family": "DejaVu Sans",
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.5,
}


def read_csv_columns(csv_path: str | Path, columns: list[str]) -> dict[str, list[float]]:
    """Load named numeric columns; errors name the missing column or file."""
    csv_path = Path(csv_path)
    if not csv_path.exists():
        raise PlotDataError(f"CSV file not found: {csv_path}")
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in columns:
            if col not in header:
                raise PlotDataError(
                    f"column {col!r} not in {csv_path.name} (has: {', '.join(header)})"
                )
        data: dict[str, list[float]] = {col: [] for col in columns}
        for row in reader:
            for col in columns:
                data[col].append(float(row[col]))
    if not data[columns[0]]:
        raise PlotDataError(f"{csv_path.name} has no data rows")
    return data


def plot_csv(
    csv_path: str | Path,
    columns: list[str],
    out_path: str | Path,
    logy: bool = False,
    title: str | None = None,
) -> Path:
    """Line chart of columns[1:] against columns[0]; writes byte-stable SVG.

    Raises PlotDataError (and writes nothing) when a column is missing or the
    file has no data rows.
    """
    if len(columns) < 2:
        raise PlotDataError("need at least two columns: x and one series")
    data = read_csv_columns(csv_path, columns)
    out_path = Path(out_path)

    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        x = data[columns[0]]
        for col in columns[1:]:
            ax.plot(x, data[col], label=col)
        ax.set_xlabel(columns[0])
        if len(columns) == 2:
            ax.set_ylabel(columns[1])
        else:
            ax.legend(loc="best")
        if logy:
            ax.set_yscale("log")
        if title:
            ax.set_title(title)
        fig.tight_layout()
        out_path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out_path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return out_path
