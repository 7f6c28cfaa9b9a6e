"""Plotting scripts for the simulator's CSV and JSON outputs."""

from ._io import gibbs_overlays, read_columns, read_summary
from .density import plot_density
from .traces import PlotSpec, plot_traces

__version__ = "0.1.0"

__all__ = [
    "PlotSpec",
    "gibbs_overlays",
    "plot_density",
    "plot_traces",
    "read_columns",
    "read_summary",
]
