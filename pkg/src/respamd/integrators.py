"""Velocity Stormer-Verlet and the r-RESPA multiple time-stepping loop.

The r-RESPA loop integrates the pair forces every base step of size dt and
the triplet forces only every `step_size_factor` steps, applying them as a
half-kick of weight dt*s/(2m) at the start and end of each full cycle:

    if i % s == 0:        v += dt*s/(2m) * F3(x_i)
    x_{i+1} = x_i + dt v + dt^2/(2m) F2(x_i)
    recompute F2
    v += dt/(2m) * (F2(x_i) + F2(x_{i+1}))
    if (i+1) % s == 0:    recompute F3;  v += dt*s/(2m) * F3(x_{i+1})

With s = 1 this is exactly velocity Verlet with the combined force, which is
also how `verlet_run` is implemented (same loop, same arithmetic). Only
iterations divisible by s are full iterations; observables are sampled there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from respamd.containers import MinimumSeparationError
from respamd.model import ParticleSystem, ValidationError, wrap_positions


class IntegrationBlowUp(RuntimeError):
    """The state became non-finite (or near-singular) during integration."""

    def __init__(self, iteration: int, reason: str, trace=None):
        self.iteration = iteration
        self.trace = trace if trace is not None else RunTrace()
        super().__init__(f"integration blew up at iteration {iteration}: {reason}")


@dataclass
class RespaSchedule:
    """Base step size, step-size factor and total iteration count."""

    dt: float
    step_size_factor: int = 1
    num_iterations: int = 0

    def __post_init__(self):
        self.dt = float(self.dt)
        self.step_size_factor = int(self.step_size_factor)
        self.num_iterations = int(self.num_iterations)
        if self.dt <= 0 or not np.isfinite(self.dt):
            raise ValidationError(f"dt must be finite and > 0, got {self.dt}")
        if self.step_size_factor < 1:
            raise ValidationError("step_size_factor must be >= 1")
        if self.num_iterations < 0:
            raise ValidationError("num_iterations must be >= 0")
        if self.num_iterations % self.step_size_factor != 0:
            raise ValidationError(
                f"num_iterations ({self.num_iterations}) must be a multiple of "
                f"the step_size_factor ({self.step_size_factor})"
            )


@dataclass
class RunTrace:
    """Observables sampled at full iterations during one run."""

    iterations: list = field(default_factory=list)
    kinetic: list = field(default_factory=list)
    potential_2b: list = field(default_factory=list)
    potential_3b: list = field(default_factory=list)
    total: list = field(default_factory=list)
    virial_2b: list = field(default_factory=list)
    virial_3b: list = field(default_factory=list)

    def record(self, iteration: int, system: ParticleSystem, container) -> None:
        kin = system.kinetic_energy()
        self.iterations.append(iteration)
        self.kinetic.append(kin)
        self.potential_2b.append(container.pair_energy)
        self.potential_3b.append(container.triplet_energy)
        self.total.append(kin + container.pair_energy + container.triplet_energy)
        self.virial_2b.append(container.pair_virial)
        self.virial_3b.append(container.triplet_virial)

    def __len__(self):
        return len(self.iterations)


def _check_finite(system: ParticleSystem, iteration: int) -> None:
    if not np.all(np.isfinite(system.positions)):
        raise IntegrationBlowUp(iteration, "non-finite position")
    if not np.all(np.isfinite(system.velocities)):
        raise IntegrationBlowUp(iteration, "non-finite velocity")


def respa_run(
    system: ParticleSystem,
    ff,
    container,
    schedule: RespaSchedule,
    sample_interval: int | None = None,
    hooks=(),
) -> RunTrace:
    """Integrate the system in place with the r-RESPA loop.

    Both force classes are evaluated once up front; afterwards pair forces
    are refreshed every iteration and triplet forces every
    `schedule.step_size_factor` iterations. Positions are wrapped back into
    the box after every drift for periodic systems. Observables are recorded
    (and `hooks` invoked with (iteration, read-only system view, container))
    at iteration 0 and at every completed iteration divisible by
    `sample_interval`, which must be a multiple of the step-size factor so
    sampling only sees full iterations.

    Raises IntegrationBlowUp when the state becomes non-finite.
    """
    s = schedule.step_size_factor
    if sample_interval is None:
        sample_interval = s
    sample_interval = int(sample_interval)
    if sample_interval < 1 or sample_interval % s != 0:
        raise ValidationError(
            f"sample_interval ({sample_interval}) must be a positive multiple "
            f"of the step_size_factor ({s})"
        )
    dt = schedule.dt
    m = system.mass
    half_dt = 0.5 * dt / m
    half_drift = 0.5 * dt * dt / m
    half_respa = 0.5 * dt * s / m

    trace = RunTrace()
    try:
        container.pair_pass(system, ff)
        container.triplet_pass(system, ff)
    except MinimumSeparationError as exc:
        raise IntegrationBlowUp(0, str(exc), trace) from exc

    view = system.view()

    def sample(iteration):
        trace.record(iteration, system, container)
        for hook in hooks:
            hook(iteration, view, container)

    sample(0)
    f2_old = system.forces_2b.copy()
    for i in range(schedule.num_iterations):
        if i % s == 0:
            system.velocities += half_respa * system.forces_3b
        system.positions += dt * system.velocities + half_drift * f2_old
        if system.periodic:
            wrap_positions(system.positions, system.box)
        try:
            container.pair_pass(system, ff)
        except MinimumSeparationError as exc:
            raise IntegrationBlowUp(i + 1, str(exc), trace) from exc
        system.velocities += half_dt * (f2_old + system.forces_2b)
        np.copyto(f2_old, system.forces_2b)
        if (i + 1) % s == 0:
            try:
                container.triplet_pass(system, ff)
            except MinimumSeparationError as exc:
                raise IntegrationBlowUp(i + 1, str(exc), trace) from exc
            system.velocities += half_respa * system.forces_3b
        try:
            _check_finite(system, i + 1)
        except IntegrationBlowUp as exc:
            exc.trace = trace
            raise
        if (i + 1) % sample_interval == 0:
            sample(i + 1)
    return trace


def verlet_run(
    system: ParticleSystem,
    ff,
    container,
    dt: float,
    num_iterations: int,
    sample_interval: int | None = None,
    hooks=(),
) -> RunTrace:
    """Velocity Stormer-Verlet baseline: the r-RESPA loop with s = 1.

    Both force classes are refreshed every iteration, so the trajectory is
    bit-identical to `respa_run` with step_size_factor 1.
    """
    schedule = RespaSchedule(dt=dt, step_size_factor=1, num_iterations=num_iterations)
    return respa_run(system, ff, container, schedule, sample_interval, hooks)


@dataclass
class EquilibrationReport:
    """Outcome of an equilibration window."""

    system: ParticleSystem
    rescale_factors: list
    tail_temperature: float
    target_temperature: float
    converged: bool


def measured_temperature(system: ParticleSystem) -> float:
    """Equipartition estimate T = (2/3) K / N."""
    return 2.0 * system.kinetic_energy() / (3.0 * system.n)


def equilibrate(
    system: ParticleSystem,
    ff,
    container,
    dt: float,
    steps: int,
    target_temperature: float,
    rescale_interval: int = 10,
) -> EquilibrationReport:
    """Drive the system towards the target temperature by velocity rescaling.

    Runs Verlet and multiplies all velocities by sqrt(T_target/T_measured)
    every `rescale_interval` steps. Convergence means the mean measured
    temperature over the last 10% of the window is within 2% of the target;
    failure to converge is reported, never raised.
    """
    if target_temperature <= 0:
        raise ValidationError("target temperature must be > 0")
    if steps < 0:
        raise ValidationError("steps must be >= 0")
    factors = []
    temperatures = []
    done = 0
    while done < steps:
        chunk = min(rescale_interval, steps - done)
        verlet_run(system, ff, container, dt, chunk, sample_interval=chunk)
        done += chunk
        t_now = measured_temperature(system)
        temperatures.append(t_now)
        if t_now > 0:
            factor = math.sqrt(target_temperature / t_now)
            system.velocities *= factor
            factors.append(factor)
    tail = temperatures[-max(1, len(temperatures) // 10) :] if temperatures else []
    tail_t = float(np.mean(tail)) if tail else measured_temperature(system)
    converged = steps == 0 or abs(tail_t - target_temperature) <= 0.02 * target_temperature
    return EquilibrationReport(
        system=system,
        rescale_factors=factors,
        tail_temperature=tail_t,
        target_temperature=target_temperature,
        converged=converged,
    )
