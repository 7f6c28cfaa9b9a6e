"""Heatmap and contour rendering of density grid dumps."""

from __future__ import annotations

import argparse
import sys

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from ._io import read_columns
from .traces import PlotSpec, _deterministic_style, _save

__all__ = ["plot_density", "main"]


def _grid_from_columns(columns: dict[str, list[float]], names, path: str):
    """Rebuild the (x, y, Z) grid from the flat row-major dump."""
    for name in names:
        if name not in columns:
            raise ValueError(f"column {name!r} not in {path}")
    xname, yname, zname = names
    x = np.unique(columns[xname])
    y = np.unique(columns[yname])
    total = len(columns[zname])
    if total == 0 or total != len(x) * len(y):
        raise ValueError(f"{path}: malformed density grid")
    # The dump iterates x outer, y inner; verify before reshaping.
    want_x = np.repeat(x, len(y))
    want_y = np.tile(y, len(x))
    if (not np.array_equal(columns[xname], want_x)
            or not np.array_equal(columns[yname], want_y)):
        raise ValueError(f"{path}: malformed density grid")
    z = np.asarray(columns[zname]).reshape(len(x), len(y))
    return x, y, z


def plot_density(spec: PlotSpec) -> str:
    """Render one grid dump as a heatmap with contour lines on top."""
    if len(spec.csv_paths) != 1:
        raise ValueError("plot_density takes exactly one input file")
    names = spec.columns if spec.columns else ("q1", "q2", "rho")
    if len(names) != 3:
        raise ValueError("density selection must name x, y, and value columns")
    path = spec.csv_paths[0]
    x, y, z = _grid_from_columns(read_columns(path), names, path)

    _deterministic_style()
    fig, ax = plt.subplots(figsize=(5.6, 4.6))
    try:
        mesh = ax.pcolormesh(x, y, z.T, shading="nearest", cmap="viridis")
        fig.colorbar(mesh, ax=ax, label=names[2])
        if np.max(z) > np.min(z):
            ax.contour(x, y, z.T, levels=6, colors="white", linewidths=0.6)
        ax.set_xlabel(spec.xlabel if spec.xlabel != "t (s)" else names[0])
        ax.set_ylabel(spec.ylabel or names[1])
        if spec.title:
            ax.set_title(spec.title)
        fig.tight_layout()
        _save(fig, spec.out_path)
    finally:
        plt.close(fig)
    return spec.out_path


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figplots-density",
        description="plot a density grid dump as a heatmap")
    parser.add_argument("csv", help="density grid CSV file")
    parser.add_argument("--columns", default="q1,q2,rho",
                        help="comma-separated x, y, value columns")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--title", default="")
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    names = tuple(c for c in args.columns.split(",") if c)
    try:
        spec = PlotSpec(csv_paths=(args.csv,), columns=names,
                        out_path=args.out, title=args.title)
        path = plot_density(spec)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
