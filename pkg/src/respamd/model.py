"""Domain types, reduced-units conventions and scenario construction.

Vectors are numpy float64 arrays of shape (3,); per-particle quantities are
arrays of shape (N, 3). Reduced units are used throughout (pair well depth,
particle diameter and particle mass all equal 1 by convention); conversion to
laboratory units is a documentation concern, not an engine one.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np


class ValidationError(ValueError):
    """A configuration or input value violates a documented invariant."""


def as_vec3(value, name="vector"):
    """Coerce to a float64 array of shape (3,)."""
    arr = np.asarray(value, dtype=np.float64)
    if arr.shape != (3,):
        raise ValidationError(f"{name} must have exactly 3 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} must be finite, got {arr}")
    return arr


@dataclass
class ForceField:
    """Interaction parameters in reduced units.

    epsilon/sigma parameterize the 12-6 pair potential, nu scales the
    triple-dipole term (nu = 0 degrades the system to pure two-body) and
    cutoff is the interaction range used by the linked-cells container.
    """

    epsilon: float = 1.0
    sigma: float = 1.0
    nu: float = 0.0
    cutoff: float = 2.5

    def __post_init__(self):
        for name in ("epsilon", "sigma", "cutoff"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v <= 0.0:
                raise ValidationError(f"force field {name} must be finite and > 0, got {v}")
            setattr(self, name, v)
        self.nu = float(self.nu)
        if not np.isfinite(self.nu) or self.nu < 0.0:
            raise ValidationError(f"force field nu must be finite and >= 0, got {self.nu}")


@dataclass
class ParticleSystem:
    """Mutable state of a simulation: positions, velocities and force buffers.

    Pair and triplet forces are kept in separate accumulators because the
    multiple time-stepping integrator updates them on different schedules.
    All four per-particle arrays always share the same length.
    """

    positions: np.ndarray
    velocities: np.ndarray
    forces_2b: np.ndarray
    forces_3b: np.ndarray
    mass: float
    box: np.ndarray
    periodic: bool

    def __post_init__(self):
        self.positions = np.ascontiguousarray(self.positions, dtype=np.float64)
        self.velocities = np.ascontiguousarray(self.velocities, dtype=np.float64)
        self.forces_2b = np.ascontiguousarray(self.forces_2b, dtype=np.float64)
        self.forces_3b = np.ascontiguousarray(self.forces_3b, dtype=np.float64)
        self.box = as_vec3(self.box, "box")
        self.mass = float(self.mass)
        self.validate()

    @classmethod
    def empty(cls, n, box, periodic=False, mass=1.0):
        z = lambda: np.zeros((n, 3))
        return cls(z(), z(), z(), z(), mass, box, periodic)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def volume(self) -> float:
        return float(np.prod(self.box))

    def validate(self):
        n = self.positions.shape[0]
        if n < 1:
            raise ValidationError("system must contain at least one particle")
        for name in ("positions", "velocities", "forces_2b", "forces_3b"):
            arr = getattr(self, name)
            if arr.shape != (n, 3):
                raise ValidationError(f"{name} must have shape ({n}, 3), got {arr.shape}")
        if self.mass <= 0 or not np.isfinite(self.mass):
            raise ValidationError(f"mass must be finite and > 0, got {self.mass}")
        if np.any(self.box <= 0):
            raise ValidationError(f"box edges must be > 0, got {self.box}")
        if self.periodic:
            if np.any(self.positions < 0) or np.any(self.positions >= self.box):
                raise ValidationError("periodic positions must lie in [0, box) per component")

    def copy(self) -> "ParticleSystem":
        return ParticleSystem(
            self.positions.copy(),
            self.velocities.copy(),
            self.forces_2b.copy(),
            self.forces_3b.copy(),
            self.mass,
            self.box.copy(),
            self.periodic,
        )

    def view(self) -> "ParticleSystem":
        """Read-only view sharing this system's storage (for sampling hooks)."""
        out = object.__new__(ParticleSystem)
        for name in ("positions", "velocities", "forces_2b", "forces_3b", "box"):
            v = getattr(self, name).view()
            v.flags.writeable = False
            object.__setattr__(out, name, v)
        object.__setattr__(out, "mass", self.mass)
        object.__setattr__(out, "periodic", self.periodic)
        return out

    def kinetic_energy(self) -> float:
        return 0.5 * self.mass * float(np.sum(self.velocities * self.velocities))

    def momentum(self) -> np.ndarray:
        return self.mass * self.velocities.sum(axis=0)


@dataclass
class SamplingConfig:
    """Observable sampling cadences, in iterations."""

    sample_every: int = 1
    rdf_sample_every: int = 100
    rdf_bins: int = 200

    def __post_init__(self):
        for name in ("sample_every", "rdf_sample_every", "rdf_bins"):
            v = int(getattr(self, name))
            if v < 1:
                raise ValidationError(f"sampling {name} must be >= 1, got {v}")
            setattr(self, name, v)


CONTAINER_KINDS = ("direct_sum", "linked_cells")


@dataclass
class ScenarioConfig:
    """A complete, validated description of one simulation run."""

    particle_count: int
    box: np.ndarray
    dt: float
    iterations: int
    step_size_factor: int = 1
    force_field: ForceField = field(default_factory=ForceField)
    temperature: float = 0.0
    equilibration_steps: int = 0
    seed: int = 0
    container: str = "direct_sum"
    periodic: bool = False
    sampling: SamplingConfig = field(default_factory=SamplingConfig)

    def __post_init__(self):
        self.box = as_vec3(self.box, "box")
        self.particle_count = int(self.particle_count)
        self.iterations = int(self.iterations)
        self.step_size_factor = int(self.step_size_factor)
        self.equilibration_steps = int(self.equilibration_steps)
        self.seed = int(self.seed)
        self.dt = float(self.dt)
        self.temperature = float(self.temperature)
        if self.particle_count < 1:
            raise ValidationError(f"particle_count must be >= 1, got {self.particle_count}")
        if self.dt <= 0 or not np.isfinite(self.dt):
            raise ValidationError(f"dt must be finite and > 0, got {self.dt}")
        if self.step_size_factor < 1:
            raise ValidationError(f"step_size_factor must be >= 1, got {self.step_size_factor}")
        if self.iterations < 0:
            raise ValidationError(f"iterations must be >= 0, got {self.iterations}")
        if self.iterations % self.step_size_factor != 0:
            raise ValidationError(
                f"iterations ({self.iterations}) must be a multiple of the "
                f"step_size_factor ({self.step_size_factor})"
            )
        if self.temperature < 0:
            raise ValidationError(f"temperature must be >= 0, got {self.temperature}")
        if self.equilibration_steps < 0:
            raise ValidationError("equilibration_steps must be >= 0")
        if self.container not in CONTAINER_KINDS:
            raise ValidationError(
                f"container must be one of {CONTAINER_KINDS}, got {self.container!r}"
            )
        if self.container == "direct_sum" and self.periodic:
            raise ValidationError("the direct_sum container does not support periodic boundaries")

    def with_overrides(self, **kwargs) -> "ScenarioConfig":
        return replace(self, **kwargs)


def _lattice_counts(count: int, box: np.ndarray) -> np.ndarray:
    """Per-dimension site counts of the smallest near-uniform cubic lattice
    holding `count` particles inside `box`."""
    density = count / float(np.prod(box))
    counts = np.maximum(1, np.floor(box * density ** (1.0 / 3.0) + 1e-12).astype(np.int64))
    while int(np.prod(counts)) < count:
        # grow the dimension that keeps the lattice spacing largest
        counts[int(np.argmax(box / (counts + 1)))] += 1
    return counts


def build_lattice_system(config: ScenarioConfig) -> ParticleSystem:
    """Place particles on a simple cubic lattice filling the box evenly.

    Sites are spaced box/counts per dimension starting at the origin, which
    keeps the arrangement consistent with periodic wrapping. Surplus lattice
    sites beyond the requested particle count are left empty. Velocities and
    force accumulators start at zero.
    """
    counts = _lattice_counts(config.particle_count, config.box)
    spacing = config.box / counts
    min_spacing = 0.5 * config.force_field.sigma
    if np.any(spacing < min_spacing):
        raise ValidationError(
            f"cannot place {config.particle_count} particles in box {config.box} "
            f"with lattice spacing >= {min_spacing} (got {spacing})"
        )
    sites = np.stack(
        np.meshgrid(
            np.arange(counts[0]) * spacing[0],
            np.arange(counts[1]) * spacing[1],
            np.arange(counts[2]) * spacing[2],
            indexing="ij",
        ),
        axis=-1,
    ).reshape(-1, 3)
    system = ParticleSystem.empty(
        config.particle_count, config.box, periodic=config.periodic, mass=1.0
    )
    system.positions[:] = sites[: config.particle_count]
    return system


def init_velocities(system: ParticleSystem, temperature: float, seed: int) -> ParticleSystem:
    """Draw Maxwell-Boltzmann velocities and remove the net momentum drift.

    Each component is drawn from a zero-mean Gaussian with variance T/m using
    a generator seeded with `seed`; afterwards the mean velocity is subtracted
    so the total momentum is zero to rounding. T = 0 zeroes all velocities.
    """
    if temperature < 0:
        raise ValidationError(f"temperature must be >= 0, got {temperature}")
    if temperature == 0.0:
        system.velocities[:] = 0.0
        return system
    rng = np.random.default_rng(seed)
    v = rng.normal(0.0, np.sqrt(temperature / system.mass), size=(system.n, 3))
    v -= v.mean(axis=0)
    system.velocities[:] = v
    return system


def wrap_positions(positions: np.ndarray, box: np.ndarray) -> None:
    """Wrap positions into [0, box) per component, in place."""
    np.mod(positions, box, out=positions)
    # float mod can round a tiny negative input up to the box edge itself
    oob = positions >= box
    if np.any(oob):
        positions[oob] = 0.0
