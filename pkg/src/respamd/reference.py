"""Brute-force reference enumerations used as oracles.

These loops visit every distinct pair (i < j) and triplet (i < j < k)
directly, apply the cutoff predicate per interaction and use action-reaction
to scatter forces to all members. They share the scalar potential kernels
with the production containers but none of the traversal machinery, which
makes them the independent enumeration oracle for the C01 passes. They are
exercised by the test suite and by the CLI `check` command.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from respamd.model import ParticleSystem
from respamd.potentials import atm_kernel, lj_kernel


@njit(cache=True)
def _pairs_kernel(positions, box, periodic, rc2, epsilon, sigma2):
    n = positions.shape[0]
    forces = np.zeros((n, 3))
    energy = 0.0
    virial = 0.0
    for i in range(n - 1):
        for j in range(i + 1, n):
            dx = positions[i, 0] - positions[j, 0]
            dy = positions[i, 1] - positions[j, 1]
            dz = positions[i, 2] - positions[j, 2]
            if periodic:
                dx -= box[0] * np.floor(dx / box[0] + 0.5)
                dy -= box[1] * np.floor(dy / box[1] + 0.5)
                dz -= box[2] * np.floor(dz / box[2] + 0.5)
            r2 = dx * dx + dy * dy + dz * dz
            if r2 > rc2:
                continue
            e, scale = lj_kernel(r2, epsilon, sigma2)
            forces[i, 0] += scale * dx
            forces[i, 1] += scale * dy
            forces[i, 2] += scale * dz
            forces[j, 0] -= scale * dx
            forces[j, 1] -= scale * dy
            forces[j, 2] -= scale * dz
            energy += e
            virial += scale * r2
    return forces, energy, virial


@njit(cache=True)
def _triplets_kernel(positions, box, periodic, rc2, nu):
    n = positions.shape[0]
    forces = np.zeros((n, 3))
    energy = 0.0
    virial = 0.0
    count = 0
    for i in range(n - 2):
        for j in range(i + 1, n - 1):
            dijx = positions[i, 0] - positions[j, 0]
            dijy = positions[i, 1] - positions[j, 1]
            dijz = positions[i, 2] - positions[j, 2]
            if periodic:
                dijx -= box[0] * np.floor(dijx / box[0] + 0.5)
                dijy -= box[1] * np.floor(dijy / box[1] + 0.5)
                dijz -= box[2] * np.floor(dijz / box[2] + 0.5)
            a = dijx * dijx + dijy * dijy + dijz * dijz
            if a > rc2:
                continue
            for k in range(j + 1, n):
                dikx = positions[i, 0] - positions[k, 0]
                diky = positions[i, 1] - positions[k, 1]
                dikz = positions[i, 2] - positions[k, 2]
                djkx = positions[j, 0] - positions[k, 0]
                djky = positions[j, 1] - positions[k, 1]
                djkz = positions[j, 2] - positions[k, 2]
                if periodic:
                    dikx -= box[0] * np.floor(dikx / box[0] + 0.5)
                    diky -= box[1] * np.floor(diky / box[1] + 0.5)
                    dikz -= box[2] * np.floor(dikz / box[2] + 0.5)
                    djkx -= box[0] * np.floor(djkx / box[0] + 0.5)
                    djky -= box[1] * np.floor(djky / box[1] + 0.5)
                    djkz -= box[2] * np.floor(djkz / box[2] + 0.5)
                b = dikx * dikx + diky * diky + dikz * dikz
                if b > rc2:
                    continue
                c = djkx * djkx + djky * djky + djkz * djkz
                if c > rc2:
                    continue
                e, de_da, de_db, de_dc = atm_kernel(a, b, c, nu)
                fjx = 2.0 * de_da * dijx - 2.0 * de_dc * djkx
                fjy = 2.0 * de_da * dijy - 2.0 * de_dc * djky
                fjz = 2.0 * de_da * dijz - 2.0 * de_dc * djkz
                fkx = 2.0 * de_db * dikx + 2.0 * de_dc * djkx
                fky = 2.0 * de_db * diky + 2.0 * de_dc * djky
                fkz = 2.0 * de_db * dikz + 2.0 * de_dc * djkz
                forces[i, 0] += -2.0 * (de_da * dijx + de_db * dikx)
                forces[i, 1] += -2.0 * (de_da * dijy + de_db * diky)
                forces[i, 2] += -2.0 * (de_da * dijz + de_db * dikz)
                forces[j, 0] += fjx
                forces[j, 1] += fjy
                forces[j, 2] += fjz
                forces[k, 0] += fkx
                forces[k, 1] += fky
                forces[k, 2] += fkz
                energy += e
                virial += -2.0 * (de_da * a + de_db * b + de_dc * c)
                count += 1
    return forces, energy, virial, count


def brute_force_pairs(system: ParticleSystem, ff, cutoff=None):
    """All distinct pairs; (forces, energy, virial). cutoff=None means none."""
    rc2 = np.inf if cutoff is None else float(cutoff) ** 2
    return _pairs_kernel(
        system.positions, system.box, system.periodic, rc2, ff.epsilon, ff.sigma * ff.sigma
    )


def brute_force_triplets(system: ParticleSystem, ff, cutoff=None):
    """All distinct triplets; (forces, energy, virial, within_cutoff_count)."""
    rc2 = np.inf if cutoff is None else float(cutoff) ** 2
    return _triplets_kernel(system.positions, system.box, system.periodic, rc2, ff.nu)
