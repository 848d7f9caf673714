"""Built-in oracle suite run by the CLI `check` command.

Each check compares an engine code path against an independent route on a
small random system: analytic forces against finite differences of the
energies, the C01 traversals against brute-force enumeration, DirectSum
against the brute-force reference, and force sums against momentum
conservation. Prints one line per check and reports overall success.
"""

from __future__ import annotations

import numpy as np

from respamd.containers import (
    DirectSum,
    LinkedCells,
    build_cell_grid,
    c01_pair_pass,
    c01_triplet_pass,
)
from respamd.model import ForceField, ParticleSystem
from respamd.potentials import atm_energy, atm_forces, lj_energy, lj_force
from respamd.reference import brute_force_pairs, brute_force_triplets


def _random_system(rng, n, box, periodic, min_sep=0.82):
    """Random positions with a lower separation bound to avoid singularities."""
    box = np.asarray(box, dtype=np.float64)
    system = ParticleSystem.empty(n, box, periodic=periodic)
    placed = 0
    guard2 = min_sep * min_sep
    while placed < n:
        cand = rng.uniform(0.0, box, size=3)
        ok = True
        for other in system.positions[:placed]:
            d = cand - other
            if periodic:
                d -= box * np.floor(d / box + 0.5)
            if float(d @ d) < guard2:
                ok = False
                break
        if ok:
            system.positions[placed] = cand
            placed += 1
    return system


def _fd_force_check(rng, trials=60, h=1e-6, tol=1e-6):
    ff = ForceField(nu=0.8)
    worst = 0.0
    for _ in range(trials):
        while True:
            pts = rng.uniform(0.0, 3.0, size=(3, 3))
            d = [np.linalg.norm(pts[a] - pts[b]) for a, b in ((0, 1), (0, 2), (1, 2))]
            if min(d) > 0.8 and max(d) < 2.5:
                break
        tf = atm_forces(pts[0], pts[1], pts[2], ff)
        for idx, analytic in enumerate(tf):
            grad = np.zeros(3)
            for axis in range(3):
                shift = np.zeros(3)
                shift[axis] = h
                moved = [p.copy() for p in pts]
                moved[idx] = pts[idx] + shift
                e_plus = atm_energy(*moved, ff)
                moved[idx] = pts[idx] - shift
                e_minus = atm_energy(*moved, ff)
                grad[axis] = (e_plus - e_minus) / (2.0 * h)
            scale = max(np.max(np.abs(analytic)), 1e-12)
            worst = max(worst, float(np.max(np.abs(analytic + grad)) / scale))
        d = pts[0] - pts[1]
        r = float(np.linalg.norm(d))
        lj_grad = np.zeros(3)
        for axis in range(3):
            shift = np.zeros(3)
            shift[axis] = h
            lj_grad[axis] = (
                lj_energy(float(np.linalg.norm(d + shift)), ff)
                - lj_energy(float(np.linalg.norm(d - shift)), ff)
            ) / (2.0 * h)
        analytic = lj_force(d, ff)
        scale = max(np.max(np.abs(analytic)), 1e-12)
        worst = max(worst, float(np.max(np.abs(analytic + lj_grad)) / scale))
    return worst <= tol, f"max relative finite-difference error {worst:.2e}"


def _c01_check(rng):
    ff = ForceField(nu=0.6, cutoff=2.5)
    system = _random_system(rng, 80, (6.5, 6.5, 6.5), periodic=True)
    grid = build_cell_grid(system, ff.cutoff)
    f2, e2, _ = c01_pair_pass(grid, system, ff)
    f3, e3, _ = c01_triplet_pass(grid, system, ff)
    rf2, re2, _ = brute_force_pairs(system, ff, cutoff=ff.cutoff)
    rf3, re3, _, _ = brute_force_triplets(system, ff, cutoff=ff.cutoff)
    worst = max(float(np.max(np.abs(f2 - rf2))), float(np.max(np.abs(f3 - rf3))))
    de = max(abs(e2 - re2), abs(e3 - re3))
    return worst <= 1e-9 and de <= 1e-9, (
        f"max force mismatch {worst:.2e}, max energy mismatch {de:.2e}"
    )


def _direct_sum_check(rng):
    ff = ForceField(nu=0.6)
    system = _random_system(rng, 40, (7.0, 7.0, 7.0), periodic=False)
    ds = DirectSum()
    ds.pair_pass(system, ff)
    ds.triplet_pass(system, ff)
    rf2, re2, _ = brute_force_pairs(system, ff)
    rf3, re3, _, _ = brute_force_triplets(system, ff)
    worst = max(
        float(np.max(np.abs(system.forces_2b - rf2))),
        float(np.max(np.abs(system.forces_3b - rf3))),
    )
    de = max(abs(ds.pair_energy - re2), abs(ds.triplet_energy - re3))
    return worst <= 1e-9 and de <= 1e-9, (
        f"max force mismatch {worst:.2e}, max energy mismatch {de:.2e}"
    )


def _momentum_check(rng):
    ff = ForceField(nu=0.6, cutoff=2.5)
    system = _random_system(rng, 60, (7.0, 7.0, 7.0), periodic=False)
    lc = LinkedCells()
    lc.pair_pass(system, ff)
    lc.triplet_pass(system, ff)
    drift = float(np.max(np.abs((system.forces_2b + system.forces_3b).sum(axis=0))))
    return drift <= 1e-9, f"net force magnitude {drift:.2e}"


def run_self_checks(seed: int = 0, emit=print) -> bool:
    checks = (
        ("force kernels vs finite differences", _fd_force_check),
        ("C01 traversals vs brute force", _c01_check),
        ("DirectSum vs brute force", _direct_sum_check),
        ("force momentum conservation", _momentum_check),
    )
    rng = np.random.default_rng(seed)
    all_ok = True
    for name, fn in checks:
        ok, detail = fn(rng)
        emit(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        all_ok = all_ok and ok
    return all_ok
