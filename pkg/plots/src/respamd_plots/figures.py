"""The five figure kinds and their rendering entry point.

Every builder is a pure function of the CSV contents: the plotted series
are exactly the loaded rows (histograms bin them, nothing else is derived),
so tests can read the data back off the returned matplotlib objects.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from respamd_plots.io import SchemaError, find_grid_points, read_csv_columns, read_float_columns

ENERGY_HISTOGRAM_BINS = 50
PRESSURE_HISTOGRAM_BINS = 20

FIGURE_KINDS = (
    "rvite_curves",
    "energy_histogram",
    "speedup",
    "rdf",
    "pressure_histogram",
)


@dataclass
class PlotJob:
    """What to render: an experiment output directory, a kind, a target file."""

    input_dir: Path
    kind: str
    output: Path

    def __post_init__(self):
        self.input_dir = Path(self.input_dir)
        self.output = Path(self.output)
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; choose from {FIGURE_KINDS}")


def _summary_rows(input_dir: Path) -> dict:
    return read_csv_columns(
        input_dir / "summary.csv",
        ("nu", "step_size_factor", "status", "rvite", "wall_seconds", "speedup"),
    )


def _single_nu_points(input_dir: Path):
    points = find_grid_points(input_dir)
    nus = {p.nu for p in points}
    if len(nus) != 1:
        raise SchemaError(
            f"figure kind needs a single-nu input directory, found nu values {sorted(nus)}"
        )
    return sorted(points, key=lambda p: p.step_size_factor)


def _build_rvite_curves(input_dir: Path):
    rows = _summary_rows(input_dir)
    series = {}
    for nu, s, status, value in zip(
        rows["nu"], rows["step_size_factor"], rows["status"], rows["rvite"]
    ):
        if status != "ok" or value == "":
            continue
        series.setdefault(int(s), []).append((float(nu), float(value)))
    if not series:
        raise SchemaError(f"summary.csv under {input_dir} has no usable rvite rows")
    fig, ax = plt.subplots(figsize=(7, 5))
    for s in sorted(series):
        data = sorted(series[s])
        ax.plot([d[0] for d in data], [d[1] for d in data], marker="o", label=f"s = {s}")
    ax.set_yscale("log")
    ax.set_xlabel("triplet coupling")
    ax.set_ylabel("relative variation in true energy")
    ax.legend()
    ax.grid(True, alpha=0.3)
    return fig


def _build_energy_histogram(input_dir: Path):
    points = _single_nu_points(input_dir)
    series = {}
    for point in points:
        data = read_float_columns(point.directory / "energies.csv", ("iteration", "total"))
        series[point.step_size_factor] = {
            int(i): e for i, e in zip(data["iteration"], data["total"])
        }
    if 1 not in series:
        raise SchemaError("energy histogram needs the s=1 reference run in the input directory")
    shared = set(series[1])
    for mapping in series.values():
        shared &= set(mapping)
    if not shared:
        raise SchemaError("the runs share no sampled iterations")
    shared = sorted(shared)
    ref_mean = float(np.mean([series[1][i] for i in shared]))
    deviations = {
        s: (np.array([mapping[i] for i in shared]) - ref_mean) / abs(ref_mean)
        for s, mapping in series.items()
    }
    lo = min(d.min() for d in deviations.values())
    hi = max(d.max() for d in deviations.values())
    if lo == hi:
        lo -= 1e-12
        hi += 1e-12
    edges = np.linspace(lo, hi, ENERGY_HISTOGRAM_BINS + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    fig, ax = plt.subplots(figsize=(7, 5))
    for s in sorted(deviations):
        if s == 1:
            continue  # the reference would be a unit spike at zero
        counts, _ = np.histogram(deviations[s], bins=edges)
        ax.plot(centers, counts / counts.sum(), label=f"s = {s}")
    ax.set_xlabel("total energy relative to the s = 1 mean")
    ax.set_ylabel("fraction of sampled iterations")
    ax.legend()
    ax.grid(True, alpha=0.3)
    return fig


def _build_speedup(input_dir: Path):
    rows = _summary_rows(input_dir)
    series = {}
    for nu, s, status, value in zip(
        rows["nu"], rows["step_size_factor"], rows["status"], rows["speedup"]
    ):
        if status != "ok" or value == "":
            continue
        series.setdefault(float(nu), []).append((int(s), float(value)))
    if not series:
        raise SchemaError(f"summary.csv under {input_dir} has no usable speedup rows")
    fig, ax = plt.subplots(figsize=(7, 5))
    multi = len(series) > 1
    smax = 1
    for nu in sorted(series):
        data = sorted(series[nu])
        smax = max(smax, data[-1][0])
        label = f"nu = {nu}" if multi else "measured"
        ax.plot([d[0] for d in data], [d[1] for d in data], marker="o", label=label)
    ax.plot([1, smax], [1, smax], "r--", label="ideal")
    ax.set_xlabel("step-size factor")
    ax.set_ylabel("speedup vs s = 1")
    ax.legend()
    ax.grid(True, alpha=0.3)
    return fig


def _build_rdf(input_dir: Path):
    points = find_grid_points(input_dir)
    fig, ax = plt.subplots(figsize=(7, 5))
    drew = 0
    mixed_nus = {p.nu for p in points if p.nu > 0.0}
    for point in sorted(points, key=lambda p: (p.nu, p.step_size_factor)):
        path = point.directory / "rdf.csv"
        if not path.is_file():
            continue
        data = read_float_columns(path, ("r", "g"))
        if point.nu == 0.0:
            ax.plot(data["r"], data["g"], "k--", label="pure two-body")
        else:
            label = f"s = {point.step_size_factor}"
            if len(mixed_nus) > 1:
                label += f", nu = {point.nu}"
            ax.plot(data["r"], data["g"], label=label)
        drew += 1
    if drew == 0:
        raise SchemaError(f"no rdf.csv files under the grid-point directories of {input_dir}")
    ax.set_xlabel("distance")
    ax.set_ylabel("g(r)")
    ax.legend()
    ax.grid(True, alpha=0.3)
    return fig


def _build_pressure_histogram(input_dir: Path):
    points = _single_nu_points(input_dir)
    values = {}
    for point in points:
        data = read_float_columns(point.directory / "pressure.csv", ("iteration", "pressure"))
        values[point.step_size_factor] = np.asarray(data["pressure"])
    lo = min(v.min() for v in values.values())
    hi = max(v.max() for v in values.values())
    if lo == hi:
        lo -= 1e-12
        hi += 1e-12
    edges = np.linspace(lo, hi, PRESSURE_HISTOGRAM_BINS + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    fig, ax = plt.subplots(figsize=(7, 5))
    for s in sorted(values):
        counts, _ = np.histogram(values[s], bins=edges)
        ax.plot(centers, counts / counts.sum(), label=f"s = {s}")
    ax.set_xlabel("pressure")
    ax.set_ylabel("fraction of sampled iterations")
    ax.legend()
    ax.grid(True, alpha=0.3)
    return fig


_BUILDERS = {
    "rvite_curves": _build_rvite_curves,
    "energy_histogram": _build_energy_histogram,
    "speedup": _build_speedup,
    "rdf": _build_rdf,
    "pressure_histogram": _build_pressure_histogram,
}


def build_figure(job: PlotJob):
    """Build the matplotlib figure for a job without writing anything."""
    return _BUILDERS[job.kind](job.input_dir)


def render(job: PlotJob) -> Path:
    """Render the job to its output image; no file is written on error."""
    fig = build_figure(job)
    try:
        job.output.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(job.output, dpi=150, bbox_inches="tight")
    finally:
        plt.close(fig)
    return job.output
