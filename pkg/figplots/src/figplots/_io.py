"""Readers for the simulator's CSV and JSON output files.

Everything plotted comes from these files; nothing is recomputed here.
"""

from __future__ import annotations

import csv
import json


def read_columns(path: str) -> dict[str, list[float]]:
    """Parse a CSV with a header row into a column-name to values map."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: file has no header row") from None
        columns: dict[str, list[float]] = {name: [] for name in header}
        for row in reader:
            if len(row) != len(header):
                raise ValueError(f"{path}: row width differs from header")
            for name, value in zip(header, row):
                columns[name].append(float(value))
    return columns


def read_summary(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def gibbs_overlays(summary: dict, columns) -> dict[str, float]:
    """Asymptote values for the selected columns, where the summary has them."""
    gibbs = summary.get("gibbs")
    if not gibbs:
        return {}
    return {c: float(gibbs[c]) for c in columns if c in gibbs}
