"""Measurement machinery: energies, RVITE, histograms, RDF, pressure, speedup.

RVITE (relative variation in true energy) is the mean absolute deviation of
the sampled total energy from its mean, normalized by the mean kinetic
energy; it is the primary accuracy metric for comparing step-size factors.
Because a cutoff container introduces its own total-energy fluctuations that
drown out the integrator signal, RVITE values measured on linked-cells runs
carry a warning flag.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
from numba import njit

from respamd.model import ParticleSystem, ValidationError


@dataclass
class ObservableSeries:
    """A scalar observable sampled at strictly increasing iterations."""

    iterations: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.iterations = np.asarray(self.iterations, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.iterations.shape != self.values.shape or self.iterations.ndim != 1:
            raise ValidationError("iterations and values must be 1-d and equally long")
        if len(self.iterations) and np.any(np.diff(self.iterations) <= 0):
            raise ValidationError("iteration indices must be strictly increasing")

    def __len__(self):
        return len(self.iterations)


@dataclass
class Histogram:
    """Bin edges plus integer counts; Sum(counts) equals the sample count."""

    edges: np.ndarray
    counts: np.ndarray
    normalization: str = "count"

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=np.float64)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if np.any(np.diff(self.edges) <= 0):
            raise ValidationError("histogram edges must be strictly ascending")
        if len(self.counts) != len(self.edges) - 1:
            raise ValidationError("need exactly len(edges) - 1 count bins")

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def fractions(self) -> np.ndarray:
        total = self.counts.sum()
        return self.counts / total if total else self.counts.astype(np.float64)


class EnergyBreakdown(NamedTuple):
    kinetic: float
    potential_2b: float
    potential_3b: float
    total: float


def kinetic_energy(system: ParticleSystem) -> float:
    return system.kinetic_energy()


def measured_temperature(system: ParticleSystem) -> float:
    """Equipartition estimate T = (2/3) K / N."""
    return 2.0 * system.kinetic_energy() / (3.0 * system.n)


def total_energy(system: ParticleSystem, container) -> EnergyBreakdown:
    """Energy decomposition using the container's most recent pass results."""
    kin = system.kinetic_energy()
    p2 = container.pair_energy
    p3 = container.triplet_energy
    return EnergyBreakdown(kin, p2, p3, kin + p2 + p3)


def rvite(energy: ObservableSeries, mean_kinetic: float) -> float:
    """Mean absolute total-energy deviation over mean kinetic energy.

    rvite = (1 / (K J)) * Sum_i |e(i) - mean(e)| for a series of J samples
    with mean kinetic energy K. Zero for a perfectly conserved energy;
    invariant under scaling energies and K by a common factor.
    """
    if len(energy) < 1:
        raise ValidationError("energy series must not be empty")
    if mean_kinetic <= 0 or not np.isfinite(mean_kinetic):
        raise ValidationError(f"mean kinetic energy must be > 0, got {mean_kinetic}")
    e = energy.values
    return float(np.sum(np.abs(e - e.mean())) / (mean_kinetic * len(e)))


def energy_deviation_histogram(
    series_s: ObservableSeries,
    series_ref: ObservableSeries,
    bins: int = 50,
) -> Histogram:
    """Histogram of (e_s(i) - mean(e_ref)) / |mean(e_ref)| over shared iterations.

    Both series are restricted to the iterations they share, which must form
    the common full-step stride of the compared runs; comparing, say, strides
    1 and 12 therefore uses every twelfth iteration only. The bin range spans
    the deviations of both series so histograms of several step-size factors
    against the same reference are directly comparable.
    """
    if bins < 1:
        raise ValidationError("bins must be >= 1")
    shared = np.intersect1d(series_s.iterations, series_ref.iterations)
    if len(shared) == 0:
        raise ValidationError("series share no sampled iterations (mismatched strides)")
    stride = np.diff(shared)
    if len(stride) and not np.all(stride == stride[0]):
        raise ValidationError("shared iterations are not evenly strided")
    e_ref = series_ref.values[np.isin(series_ref.iterations, shared)]
    e_s = series_s.values[np.isin(series_s.iterations, shared)]
    ref_mean = e_ref.mean()
    if ref_mean == 0:
        raise ValidationError("reference series has zero mean energy")
    dev_s = (e_s - ref_mean) / abs(ref_mean)
    dev_ref = (e_ref - ref_mean) / abs(ref_mean)
    lo = min(dev_s.min(), dev_ref.min())
    hi = max(dev_s.max(), dev_ref.max())
    if lo == hi:
        lo -= 0.5
        hi += 0.5
    counts, edges = np.histogram(dev_s, bins=bins, range=(lo, hi))
    return Histogram(edges=edges, counts=counts)


@njit(cache=True)
def _distance_histogram(positions, box, r_max, bins):
    n = positions.shape[0]
    counts = np.zeros(bins, np.int64)
    inv_width = bins / r_max
    r2_max = r_max * r_max
    bx, by, bz = box[0], box[1], box[2]
    hx, hy, hz = 0.5 * bx, 0.5 * by, 0.5 * bz
    for i in range(n - 1):
        xi = positions[i, 0]
        yi = positions[i, 1]
        zi = positions[i, 2]
        for j in range(i + 1, n):
            dx = xi - positions[j, 0]
            dy = yi - positions[j, 1]
            dz = zi - positions[j, 2]
            if dx > hx:
                dx -= bx
            elif dx < -hx:
                dx += bx
            if dy > hy:
                dy -= by
            elif dy < -hy:
                dy += by
            if dz > hz:
                dz -= bz
            elif dz < -hz:
                dz += bz
            r2 = dx * dx + dy * dy + dz * dz
            if r2 >= r2_max:
                continue
            b = int(np.sqrt(r2) * inv_width)
            if b >= bins:
                b = bins - 1
            counts[b] += 2  # ordered pairs
    return counts


def rdf(
    samples: Sequence[ParticleSystem],
    r_max: Optional[float] = None,
    bins: int = 200,
):
    """Radial distribution function averaged over periodic snapshots.

    g(r_b) = hist_b / (N rho V_shell(b) n_frames) with rho = N/V and
    minimum-image distances; hist counts ordered neighbor pairs. Returns an
    array of (r_center, g) rows. r_max defaults to half the smallest box
    edge and may not exceed it.
    """
    if not samples:
        raise ValidationError("need at least one snapshot")
    first = samples[0]
    if not first.periodic:
        raise ValidationError("rdf requires periodic systems")
    half_box = float(first.box.min()) / 2.0
    if r_max is None:
        r_max = half_box
    if r_max > half_box + 1e-12:
        raise ValidationError(f"r_max ({r_max}) must be <= half the smallest box edge ({half_box})")
    if bins < 1:
        raise ValidationError("bins must be >= 1")
    n = first.n
    volume = first.volume
    counts = np.zeros(bins, np.int64)
    for system in samples:
        counts += _distance_histogram(system.positions, system.box, float(r_max), bins)
    edges = np.linspace(0.0, r_max, bins + 1)
    shell_volumes = 4.0 / 3.0 * np.pi * (edges[1:] ** 3 - edges[:-1] ** 3)
    rho = n / volume
    g = counts / (n * rho * shell_volumes * len(samples))
    centers = 0.5 * (edges[:-1] + edges[1:])
    return np.column_stack([centers, g])


def pressure_virial(
    temperature: float,
    system: ParticleSystem,
    pair_virial: float,
    triplet_virial: float,
) -> float:
    """Virial pressure P = N T / V + (W2 + W3) / (3 V)."""
    v = system.volume
    return system.n * temperature / v + (pair_virial + triplet_virial) / (3.0 * v)


def speedup(timings: dict) -> dict:
    """Wall-clock speedup per step-size factor relative to the s = 1 baseline."""
    if 1 not in timings:
        raise ValidationError("timings must contain the step-size-factor 1 baseline")
    base = timings[1]
    return {s: base / t for s, t in timings.items()}
