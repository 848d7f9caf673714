"""CSV loading against the engine's documented schemas."""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path


class SchemaError(ValueError):
    """An input file is missing, empty, or lacks a required column."""


_GRID_DIR = re.compile(r"^nu(?P<nu>[0-9.eE+-]+)_s(?P<s>\d+)$")


@dataclass(frozen=True)
class GridPoint:
    nu: float
    step_size_factor: int
    directory: Path


def read_csv_columns(path: Path, required: tuple) -> dict:
    """Read a CSV into {column: list}; every required column must exist."""
    if not path.is_file():
        raise SchemaError(f"missing input file {path}")
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path} is empty") from None
        for column in required:
            if column not in header:
                raise SchemaError(f"{path} lacks required column {column!r}")
        rows = [row for row in reader if row]
    if not rows:
        raise SchemaError(f"{path} contains no data rows")
    out = {}
    for column in required:
        idx = header.index(column)
        out[column] = [row[idx] for row in rows]
    return out


def read_float_columns(path: Path, required: tuple) -> dict:
    data = read_csv_columns(path, required)
    return {
        column: [float(v) if v != "" else float("nan") for v in values]
        for column, values in data.items()
    }


def find_grid_points(input_dir: Path) -> list:
    """Grid-point directories nu<value>_s<factor> under the input directory."""
    input_dir = Path(input_dir)
    if not input_dir.is_dir():
        raise SchemaError(f"input directory {input_dir} does not exist")
    points = []
    for child in sorted(input_dir.iterdir()):
        match = _GRID_DIR.match(child.name)
        if child.is_dir() and match:
            points.append(
                GridPoint(
                    nu=float(match.group("nu")),
                    step_size_factor=int(match.group("s")),
                    directory=child,
                )
            )
    if not points:
        raise SchemaError(f"no nu*_s* grid-point directories under {input_dir}")
    return points
