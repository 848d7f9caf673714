"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with `pytest tests/test_acceptance.py -v -s`).

The expensive desk-scale experiment sweeps are shared module-scoped
fixtures; everything else builds its own small systems. Numba-compiled
kernels are warmed once so the runtime-bounded criteria measure algorithm
time, not JIT time.
"""

import time
from collections import Counter
from pathlib import Path

import numpy as np
import pytest

from respamd.cli import main as cli_main
from respamd.containers import (
    DirectSum,
    LinkedCells,
    build_cell_grid,
    c01_pair_pass,
    c01_triplet_pass,
    collect_triplet_visits,
)
from respamd.experiment import SUMMARY_COLUMNS, run_experiment
from respamd.integrators import RespaSchedule, respa_run, verlet_run
from respamd.model import (
    ForceField,
    ParticleSystem,
    ScenarioConfig,
    build_lattice_system,
    init_velocities,
)
from respamd.observables import ObservableSeries, pressure_virial, rdf, rvite
from respamd.potentials import atm_energy, atm_forces, lj_energy, lj_force
from respamd.reference import brute_force_pairs, brute_force_triplets
from respamd.scenarios import parse_scenario

from conftest import finite_difference_gradient, make_random_system, random_triangle

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


def report(name, ok, detail=""):
    print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip())
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module", autouse=True)
def warm_kernels():
    """Compile every jitted kernel outside the timed sections."""
    rng = np.random.default_rng(0)
    ff = ForceField(nu=0.5, cutoff=2.5)
    system = make_random_system(rng, 24, (6.0, 6.0, 6.0), periodic=True)
    grid = build_cell_grid(system, ff.cutoff)
    c01_pair_pass(grid, system, ff)
    c01_triplet_pass(grid, system, ff)
    collect_triplet_visits(grid, system)
    brute_force_pairs(system, ff, cutoff=ff.cutoff)
    brute_force_triplets(system, ff, cutoff=ff.cutoff)
    free = make_random_system(rng, 16, (6.0, 6.0, 6.0), periodic=False)
    ds = DirectSum()
    ds.pair_pass(free, ff)
    ds.triplet_pass(free, ff)
    rdf([system], bins=10)


@pytest.fixture(scope="module")
def toy_sweep(tmp_path_factory):
    plan = parse_scenario(SCENARIO_DIR / "toy_desk.scenario")
    t0 = time.perf_counter()
    result = run_experiment(plan, tmp_path_factory.mktemp("toy"), threads=2)
    return result, time.perf_counter() - t0


@pytest.fixture(scope="module")
def aluminum_ds_sweep(tmp_path_factory):
    plan = parse_scenario(SCENARIO_DIR / "aluminum_desk_ds.scenario")
    return run_experiment(plan, tmp_path_factory.mktemp("ds"), threads=2)


@pytest.fixture(scope="module")
def aluminum_lc_runs(tmp_path_factory):
    plan = parse_scenario(SCENARIO_DIR / "aluminum_desk_lc.scenario")
    plan.nu_values = [0.0, plan.config.force_field.nu]
    plan.step_size_factors = [1, 2, 6]
    return run_experiment(plan, tmp_path_factory.mktemp("lc"), threads=2)


def test_force_correctness_oracle(rng):
    """Analytic forces vs central finite differences, 1000+1000 configs."""
    ff = ForceField(nu=0.8, cutoff=2.5)
    t0 = time.perf_counter()
    worst_pair = 0.0
    checked = 0
    while checked < 1000:
        d = rng.uniform(-2.5, 2.5, size=3)
        r = np.linalg.norm(d)
        if not 0.8 <= r <= 2.5:
            continue
        analytic = lj_force(d, ff)
        grad = finite_difference_gradient(lambda x: lj_energy(np.linalg.norm(x), ff), d)
        worst_pair = max(worst_pair, np.max(np.abs(analytic + grad)) / np.max(np.abs(analytic)))
        checked += 1
    worst_triplet = 0.0
    worst_sum = 0.0
    for _ in range(1000):
        pts = random_triangle(rng)
        forces = atm_forces(pts[0], pts[1], pts[2], ff)
        worst_sum = max(worst_sum, float(np.max(np.abs(forces.f_i + forces.f_j + forces.f_k))))
        for member, analytic in enumerate(forces):
            def energy_of(x, member=member):
                moved = [p.copy() for p in pts]
                moved[member] = x
                return atm_energy(*moved, ff)

            grad = finite_difference_gradient(energy_of, pts[member])
            scale = max(np.max(np.abs(analytic)), 1e-12)
            worst_triplet = max(worst_triplet, np.max(np.abs(analytic + grad)) / scale)
    elapsed = time.perf_counter() - t0
    ok = worst_pair <= 1e-6 and worst_triplet <= 1e-6 and worst_sum <= 1e-12 and elapsed < 10.0
    report(
        "force correctness (finite-difference oracle)",
        ok,
        f"pair {worst_pair:.1e}, triplet {worst_triplet:.1e}, "
        f"newton3 {worst_sum:.1e}, {elapsed:.1f}s",
    )


def test_traversal_equivalence_oracle(rng):
    """C01 passes vs brute-force loops on 50 random periodic systems."""
    ff = ForceField(nu=0.6, cutoff=2.5)
    t0 = time.perf_counter()
    worst_force = 0.0
    worst_energy = 0.0
    visits_ok = True
    for _ in range(50):
        edge = rng.uniform(6.0, 10.0)
        n = min(200, int(rng.uniform(0.3, 0.6) * edge**3))
        system = make_random_system(rng, n, (edge,) * 3, periodic=True, min_sep=0.8)
        grid = build_cell_grid(system, ff.cutoff)
        f2, e2, _ = c01_pair_pass(grid, system, ff)
        f3, e3, _ = c01_triplet_pass(grid, system, ff)
        rf2, re2, _ = brute_force_pairs(system, ff, cutoff=ff.cutoff)
        rf3, re3, _, within = brute_force_triplets(system, ff, cutoff=ff.cutoff)
        worst_force = max(
            worst_force,
            float(np.max(np.abs(f2 - rf2))),
            float(np.max(np.abs(f3 - rf3))),
        )
        worst_energy = max(
            worst_energy,
            abs(e2 - re2) / max(1.0, abs(re2)),
            abs(e3 - re3) / max(1.0, abs(re3)),
        )
        visits = Counter(map(tuple, collect_triplet_visits(grid, system)))
        if len(visits) != within or any(v != 3 for v in visits.values()):
            visits_ok = False
    elapsed = time.perf_counter() - t0
    ok = worst_force <= 1e-9 and worst_energy <= 1e-10 and visits_ok and elapsed < 60.0
    report(
        "traversal equivalence (brute-force oracle)",
        ok,
        f"force {worst_force:.1e}, energy {worst_energy:.1e}, "
        f"visits {'3x' if visits_ok else 'BAD'}, {elapsed:.1f}s",
    )


def test_container_cross_check(rng):
    """LinkedCells with cutoff >= box diagonal reproduces DirectSum."""
    worst = 0.0
    for _ in range(5):
        n = int(rng.uniform(40, 100))
        system = make_random_system(rng, n, (6.0, 6.0, 6.0), periodic=False)
        ff = ForceField(nu=0.7, cutoff=float(np.linalg.norm(system.box)))
        a, b = system.copy(), system.copy()
        ds, lc = DirectSum(), LinkedCells()
        ds.pair_pass(a, ff)
        ds.triplet_pass(a, ff)
        lc.pair_pass(b, ff)
        lc.triplet_pass(b, ff)
        worst = max(
            worst,
            float(np.max(np.abs(a.forces_2b - b.forces_2b))),
            float(np.max(np.abs(a.forces_3b - b.forces_3b))),
        )
    report("container cross-check (LinkedCells == DirectSum)", worst <= 1e-9, f"max diff {worst:.1e}")


def test_respa_identity_with_unit_factor(rng):
    """step_size_factor 1 degenerates to velocity Verlet."""
    ff = ForceField(nu=0.6, cutoff=2.5)
    cfg = ScenarioConfig(particle_count=48, box=(5.5,) * 3, dt=0.001, iterations=0)
    system = build_lattice_system(cfg)
    init_velocities(system, 0.9, seed=3)
    a, b = system.copy(), system.copy()
    respa_run(a, ff, DirectSum(), RespaSchedule(0.001, 1, 1000))
    verlet_run(b, ff, DirectSum(), 0.001, 1000)
    worst = max(
        float(np.max(np.abs(a.positions - b.positions))),
        float(np.max(np.abs(a.velocities - b.velocities))),
    )
    report("r-RESPA s=1 identity with Verlet", worst <= 1e-12, f"max diff {worst:.1e}")


def test_conservation_suite():
    """Momentum, bounded energy drift, and time reversibility (N=64)."""
    ff = ForceField(nu=0.5, cutoff=2.5)
    cfg = ScenarioConfig(particle_count=64, box=(5.04,) * 3, dt=0.001, iterations=0)
    worst_momentum = 0.0
    worst_drift = 0.0
    for s in (1, 2, 6):
        iterations = 10_000 + (-10_000) % s
        system = build_lattice_system(cfg)
        init_velocities(system, 0.5, seed=13)
        momenta = []
        hook = lambda it, view, c: momenta.append(
            float(np.max(np.abs(view.velocities.sum(axis=0))))
        )
        trace = respa_run(
            system, ff, DirectSum(), RespaSchedule(0.001, s, iterations), s, hooks=(hook,)
        )
        worst_momentum = max(worst_momentum, max(momenta))
        total = np.asarray(trace.total)
        tenth = len(total) // 10
        drift = abs(total[:tenth].mean() - total[-tenth:].mean()) / abs(total.mean())
        worst_drift = max(worst_drift, drift)
    system = build_lattice_system(cfg)
    init_velocities(system, 0.5, seed=13)
    start = system.positions.copy()
    verlet_run(system, ff, DirectSum(), 0.001, 500)
    system.velocities *= -1.0
    verlet_run(system, ff, DirectSum(), 0.001, 500)
    reversal = float(np.max(np.abs(system.positions - start)))
    ok = worst_momentum <= 1e-9 and worst_drift <= 1e-4 and reversal <= 1e-6
    report(
        "conservation suite (momentum, drift, reversibility)",
        ok,
        f"|p| {worst_momentum:.1e}, drift {worst_drift:.1e}, reversal {reversal:.1e}",
    )


def test_energy_variation_trend_across_factors(toy_sweep):
    """Desk-scale toy sweep: RVITE grows with the step-size factor."""
    result, elapsed = toy_sweep
    values = {
        (p.nu, p.step_size_factor): p.rvite for p in result.points if p.status == "ok"
    }
    strong = [values[(0.9, s)] for s in (1, 3, 6, 12)]
    ordered = all(strong[i + 1] >= strong[i] * 0.95 for i in range(3))
    ok = (
        len(values) == 8
        and strong[3] > strong[0]
        and ordered
        and elapsed < 600.0
    )
    report(
        "energy-variation trend vs step-size factor",
        ok,
        f"rvite(nu=0.9) {['%.2e' % v for v in strong]}, {elapsed:.0f}s",
    )


def test_mean_energy_deviation_across_factors(aluminum_ds_sweep):
    """DirectSum aluminum analog: mean energy stays put for s in 2,3,6."""
    energies = {p.step_size_factor: p.mean_energy for p in aluminum_ds_sweep.points}
    base = energies[1]
    deviations = {s: abs(energies[s] - base) / abs(base) for s in (2, 3, 6)}
    ok = all(d <= 1e-4 for d in deviations.values())
    report(
        "mean total-energy deviation vs Verlet",
        ok,
        " ".join(f"s={s}:{d:.1e}" for s, d in deviations.items()),
    )


def test_speedup_trends(aluminum_ds_sweep, aluminum_lc_runs):
    """DirectSum speedup strong and monotone; cutoff speedup smaller."""
    ds_walls = {p.step_size_factor: p.wall_seconds for p in aluminum_ds_sweep.points}
    ds_speedup = {s: ds_walls[1] / ds_walls[s] for s in ds_walls}
    lc_walls = {
        p.step_size_factor: p.wall_seconds
        for p in aluminum_lc_runs.points
        if p.nu > 0.0
    }
    lc_speedup2 = lc_walls[1] / lc_walls[2]
    ok = (
        ds_speedup[2] >= 1.5
        and ds_speedup[6] > ds_speedup[2]
        and lc_speedup2 >= 1.0
        and lc_speedup2 < ds_speedup[2]
    )
    report(
        "speedup trends (DirectSum vs cutoff)",
        ok,
        f"DS s2 {ds_speedup[2]:.2f}, DS s6 {ds_speedup[6]:.2f}, LC s2 {lc_speedup2:.2f}",
    )


def test_rdf_sensitivity_and_stability(aluminum_lc_runs):
    """Triplet forces shift the RDF; step-size factors barely do."""
    curves = {}
    for p in aluminum_lc_runs.points:
        rows = np.loadtxt(p.directory / "rdf.csv", delimiter=",", skiprows=1)
        curves[(p.nu, p.step_size_factor)] = rows[:, 1]
    nu = max(nu for nu, _ in curves)
    pure = curves[(0.0, 1)]
    mixed_1 = curves[(nu, 1)]
    mixed_6 = curves[(nu, 6)]
    body_effect = float(np.max(np.abs(pure - mixed_1)))
    factor_effect = float(np.max(np.abs(mixed_1 - mixed_6)))
    ok = body_effect >= 0.05 and factor_effect <= 0.05
    report(
        "RDF: triplet effect vs step-size-factor effect",
        ok,
        f"two- vs three-body {body_effect:.3f}, s=1 vs s=6 {factor_effect:.3f}",
    )


def test_observable_sanity(rng):
    """Ideal-gas pressure and RDF limits; RVITE of a constant series."""
    system = make_random_system(rng, 500, (8.0, 8.0, 8.0), periodic=True, min_sep=0.0)
    init_velocities(system, 1.3, seed=4)
    measured_t = 2.0 * system.kinetic_energy() / (3.0 * system.n)
    pressure = pressure_virial(measured_t, system, 0.0, 0.0)
    rho_t = system.n / system.volume * 1.3
    pressure_ok = abs(pressure - rho_t) / rho_t <= 0.05
    frames = []
    for _ in range(100):
        frame = ParticleSystem.empty(500, (8.0, 8.0, 8.0), periodic=True)
        frame.positions[:] = rng.uniform(0.0, 8.0, size=(500, 3))
        frames.append(frame)
    curve = rdf(frames, bins=80)
    r, g = curve[:, 0], curve[:, 1]
    rdf_ok = bool(np.all(np.abs(g[r >= 0.5] - 1.0) <= 0.1))
    flat = rvite(ObservableSeries(np.arange(10), np.full(10, -7.5)), mean_kinetic=3.0)
    ok = pressure_ok and rdf_ok and flat == 0.0
    report(
        "observable sanity (ideal gas, constant series)",
        ok,
        f"pressure rel dev {abs(pressure - rho_t) / rho_t:.3f}, "
        f"rdf max dev {np.max(np.abs(g[r >= 0.5] - 1.0)):.3f}, rvite {flat}",
    )


def test_single_thread_reruns_byte_identical(tmp_path):
    """Identical scenario + seed -> identical CSV bytes (threads=1)."""
    scenario = tmp_path / "det.scenario"
    scenario.write_text(
        "particles=60\nbox=5.2 5.2 5.2\nperiodic=true\ncontainer=linked_cells\n"
        "temperature=1.0\nseed=2\ndt=0.002\niterations=96\nequilibration=24\n"
        "nu=0.3\ncutoff=2.5\nsample_every=6\nrdf_sample_every=24\nrdf_bins=40\n"
        "step_size_factors=1,3\n"
    )
    for out in ("a", "b"):
        code = cli_main(
            ["--output", str(tmp_path / out), "--threads", "1", "sweep", str(scenario)]
        )
        assert code == 0
    identical = True
    for sub in ("nu0.3_s1", "nu0.3_s3"):
        for name in ("energies.csv", "pressure.csv", "rdf.csv"):
            a = (tmp_path / "a" / sub / name).read_bytes()
            b = (tmp_path / "b" / sub / name).read_bytes()
            identical = identical and a == b
    # summary.csv carries wall-clock timing columns; compare the rest
    timing = {SUMMARY_COLUMNS.index("wall_seconds"), SUMMARY_COLUMNS.index("speedup")}
    for la, lb in zip(
        (tmp_path / "a" / "summary.csv").read_text().splitlines(),
        (tmp_path / "b" / "summary.csv").read_text().splitlines(),
    ):
        ca = [v for idx, v in enumerate(la.split(",")) if idx not in timing]
        cb = [v for idx, v in enumerate(lb.split(",")) if idx not in timing]
        identical = identical and ca == cb
    report("single-thread reruns byte-identical", identical)
