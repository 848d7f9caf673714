"""Reduced-units molecular dynamics with mixed two-body and three-body forces.

The engine combines a Lennard-Jones 12-6 pair potential with the
Axilrod-Teller-Muto triple-dipole potential and integrates the equations of
motion either with velocity Stormer-Verlet or with an r-RESPA multiple
time-stepping loop that evaluates the expensive triplet forces only every
`step_size_factor` iterations. Interactions are enumerated either by a
DirectSum reference container (all pairs, all triplets, no cutoff) or by a
linked-cells container with a C01 traversal that never writes to particles
outside the base cell.
"""

from respamd.model import (
    ForceField,
    ParticleSystem,
    SamplingConfig,
    ScenarioConfig,
    ValidationError,
    build_lattice_system,
    init_velocities,
)
from respamd.potentials import (
    TripletForces,
    atm_energy,
    atm_forces,
    lj_energy,
    lj_force,
    within_cutoff_pair,
    within_cutoff_triplet,
)
from respamd.containers import CellGrid, DirectSum, LinkedCells, build_cell_grid
from respamd.integrators import (
    EquilibrationReport,
    IntegrationBlowUp,
    RespaSchedule,
    RunTrace,
    equilibrate,
    respa_run,
    verlet_run,
)
from respamd.observables import (
    EnergyBreakdown,
    Histogram,
    ObservableSeries,
    energy_deviation_histogram,
    kinetic_energy,
    measured_temperature,
    pressure_virial,
    rdf,
    rvite,
    speedup,
    total_energy,
)

__version__ = "0.1.0"
