"""Line plots of trajectory CSV columns with optional asymptote overlays."""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from ._io import gibbs_overlays, read_columns, read_summary

__all__ = ["PlotSpec", "plot_traces", "main"]

# Line coding for sweep comparisons: solid, dashed, dash-dotted.
_LINESTYLES = ("solid", "dashed", "dashdot")


def _deterministic_style() -> None:
    # Stable ids and searchable text, so identical inputs give identical SVG.
    matplotlib.rcParams["svg.hashsalt"] = "figplots"
    matplotlib.rcParams["svg.fonttype"] = "none"


def _save(fig, out_path: str) -> None:
    ext = os.path.splitext(out_path)[1].lower().lstrip(".") or "svg"
    if ext == "svg":
        fig.savefig(out_path, format="svg", metadata={"Date": None})
    else:
        fig.savefig(out_path, format=ext)


@dataclass(frozen=True)
class PlotSpec:
    """What to read, which columns to draw, and where the image goes."""

    csv_paths: tuple[str, ...]
    columns: tuple[str, ...]
    out_path: str
    x_column: str = "t_seconds"
    overlays: dict[str, float] = field(default_factory=dict)
    xlabel: str = "t (s)"
    ylabel: str = ""
    title: str = ""


def plot_traces(spec: PlotSpec) -> str:
    """Render the selected columns of each CSV as overlaid line traces.

    All inputs are validated before the figure is created, so a failed
    call never leaves an output file behind.
    """
    if not spec.csv_paths:
        raise ValueError("no input files selected")
    if not spec.columns:
        raise ValueError("no columns selected")
    loaded = []
    for path in spec.csv_paths:
        columns = read_columns(path)
        for name in (spec.x_column, *spec.columns):
            if name not in columns:
                raise ValueError(f"column {name!r} not in {path}")
        loaded.append((path, columns))

    _deterministic_style()
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    try:
        for index, (path, columns) in enumerate(loaded):
            stem = os.path.splitext(os.path.basename(path))[0]
            style = _LINESTYLES[index % len(_LINESTYLES)]
            for name in spec.columns:
                label = name if len(loaded) == 1 else f"{stem}: {name}"
                ax.plot(columns[spec.x_column], columns[name],
                        linestyle=style, label=label)
        for name, value in sorted(spec.overlays.items()):
            ax.axhline(value, linestyle="dashdot", linewidth=1.0,
                       color="black", label=f"{name} Gibbs")
        ax.set_xlabel(spec.xlabel)
        if spec.ylabel:
            ax.set_ylabel(spec.ylabel)
        if spec.title:
            ax.set_title(spec.title)
        ax.legend(loc="best", fontsize="small")
        fig.tight_layout()
        _save(fig, spec.out_path)
    finally:
        plt.close(fig)
    return spec.out_path


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figplots-traces",
        description="plot trajectory CSV columns as line traces")
    parser.add_argument("csv", nargs="+", help="trajectory CSV file(s)")
    parser.add_argument("--columns", required=True,
                        help="comma-separated y columns")
    parser.add_argument("--x", default="t_seconds", help="x column")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--summary",
                        help="summary JSON; adds Gibbs asymptote overlays")
    parser.add_argument("--ylabel", default="")
    parser.add_argument("--title", default="")
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    columns = tuple(c for c in args.columns.split(",") if c)
    overlays: dict[str, float] = {}
    try:
        if args.summary:
            overlays = gibbs_overlays(read_summary(args.summary), columns)
        spec = PlotSpec(csv_paths=tuple(args.csv), columns=columns,
                        out_path=args.out, x_column=args.x, overlays=overlays,
                        ylabel=args.ylabel, title=args.title)
        path = plot_traces(spec)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
