"""Interaction enumeration: DirectSum reference and linked-cells C01 traversal.

DirectSum evaluates every distinct pair and triplet without a cutoff and
exploits action-reaction, which makes it the accuracy reference. LinkedCells
bins particles into a cell grid sized by the cutoff and runs C01 traversals:
every cell acts once as the *base cell* and accumulates forces only onto its
own particles, reading neighbors within the interaction reach. Because no
pass ever writes outside its base cell, base cells can be processed in
parallel without locks; the price is that each pair is evaluated twice and
each triplet three times, which the energy bookkeeping compensates by
attributing phi2/2 per pair visit and phi3/3 per triplet visit.

Triplet partner cells are enumerated through precomputed offset patterns
(c1, c2), kept unique by requiring c1 <= c2 lexicographically and valid by
requiring the minimal distances between base cell, c1 and c2 to all lie
within the cutoff.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from numba import config as _numba_config
from numba import njit, prange

from respamd.model import ParticleSystem, ValidationError
from respamd.potentials import MIN_DISTANCE_SQ, atm_kernel, lj_kernel

# the workqueue layer is always available and fork safe
_numba_config.THREADING_LAYER = "workqueue"

# fixed chunk count for the DirectSum partitioning; per-chunk buffers are
# merged in ascending chunk order, so results do not depend on thread count
DIRECT_SUM_CHUNKS = 16


class MinimumSeparationError(ValidationError):
    """Two particles came closer than the kernel separation guard."""


class TripletOffsetPattern(NamedTuple):
    """Relative cell offsets (c1, c2) naming the two partner cells."""

    c1: tuple
    c2: tuple


@dataclass
class CellGrid:
    """Linked-cells decomposition of one snapshot of a particle system."""

    cells_per_dim: np.ndarray
    cell_size: np.ndarray
    origin: np.ndarray
    interaction_reach: np.ndarray
    cutoff: float
    periodic: bool
    box: np.ndarray
    cell_start: np.ndarray
    cell_particles: np.ndarray
    pair_cells: np.ndarray
    triplet_patterns: np.ndarray
    triplet_same_cell: np.ndarray

    @property
    def num_cells(self) -> int:
        return int(np.prod(self.cells_per_dim))

    def particles_of_cell(self, cell: int) -> np.ndarray:
        return self.cell_particles[self.cell_start[cell] : self.cell_start[cell + 1]]


def _cell_gap_distance(delta, cells_per_dim, cell_size, periodic) -> float:
    """Minimal distance between two cell boxes `delta` cells apart."""
    d2 = 0.0
    for d in range(3):
        dd = abs(int(delta[d]))
        if periodic:
            n = int(cells_per_dim[d])
            dd = dd % n
            dd = min(dd, n - dd)
        gap = max(0, dd - 1) * float(cell_size[d])
        d2 += gap * gap
    return float(np.sqrt(d2))


def _offset_cube(reach) -> np.ndarray:
    rx, ry, rz = (int(r) for r in reach)
    offs = [
        (x, y, z)
        for x in range(-rx, rx + 1)
        for y in range(-ry, ry + 1)
        for z in range(-rz, rz + 1)
    ]
    return np.array(offs, dtype=np.int64)


def generate_pair_offsets(grid: CellGrid) -> np.ndarray:
    """All cell offsets within reach whose minimal distance is <= cutoff."""
    offs = _offset_cube(grid.interaction_reach)
    keep = [
        o
        for o in offs
        if _cell_gap_distance(o, grid.cells_per_dim, grid.cell_size, grid.periodic)
        <= grid.cutoff
    ]
    return np.array(keep, dtype=np.int64).reshape(-1, 3)


def generate_triplet_offsets(grid: CellGrid) -> list[TripletOffsetPattern]:
    """Every valid unique offset pattern (c1, c2) for the grid.

    c1 and c2 range over the interaction-reach cube, c1 <= c2
    lexicographically, and the minimal distances base-c1, base-c2 and c1-c2
    must all be within the cutoff. The list is a pure function of the grid
    geometry, never of the particle data.
    """
    offs = _offset_cube(grid.interaction_reach)
    dims, size, per = grid.cells_per_dim, grid.cell_size, grid.periodic
    reachable = [o for o in offs if _cell_gap_distance(o, dims, size, per) <= grid.cutoff]
    patterns = []
    for c1 in reachable:
        for c2 in reachable:
            if tuple(c1) > tuple(c2):
                continue
            if _cell_gap_distance(c2 - c1, dims, size, per) <= grid.cutoff:
                patterns.append(TripletOffsetPattern(tuple(int(v) for v in c1), tuple(int(v) for v in c2)))
    return patterns


def _canonical_pair_offsets(grid: CellGrid) -> np.ndarray:
    """Pair offsets wrapped to [0, cells) per dimension, deduplicated.

    On grids with fewer than 2*reach+1 cells per dimension several raw
    offsets alias the same cell; deduplication keeps each neighbor cell
    visited exactly once.
    """
    offs = generate_pair_offsets(grid)
    if not grid.periodic:
        return offs
    canon = np.mod(offs, grid.cells_per_dim[None, :])
    return np.unique(canon, axis=0)


def _canonical_triplet_offsets(
    grid: CellGrid, pair_cells: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Triplet patterns as index pairs into the canonical neighbor-cell list.

    For periodic grids the raw offsets are wrapped to [0, cells) first and
    patterns whose unordered wrapped cell pair coincides are deduplicated, so
    each actual partner-cell pair is enumerated exactly once per base cell
    regardless of grid size. The same-cell flag marks patterns whose two
    partner cells coincide (these need the j < k tie-break).
    """
    index_of = {tuple(int(v) for v in row): idx for idx, row in enumerate(pair_cells)}

    def canonical(offset):
        if grid.periodic:
            return tuple(int(o) % int(n) for o, n in zip(offset, grid.cells_per_dim))
        return tuple(int(o) for o in offset)

    pairs = set()
    for p in generate_triplet_offsets(grid):
        i1 = index_of[canonical(p.c1)]
        i2 = index_of[canonical(p.c2)]
        pairs.add((min(i1, i2), max(i1, i2)))
    rows = np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)
    same = rows[:, 0] == rows[:, 1]
    return rows, same


@njit(cache=True)
def _bin_particles(positions, origin, inv_cell, cells_per_dim):
    n = positions.shape[0]
    nx, ny, nz = cells_per_dim[0], cells_per_dim[1], cells_per_dim[2]
    ncell = nx * ny * nz
    cell_of = np.empty(n, np.int64)
    for i in range(n):
        cx = int((positions[i, 0] - origin[0]) * inv_cell[0])
        cy = int((positions[i, 1] - origin[1]) * inv_cell[1])
        cz = int((positions[i, 2] - origin[2]) * inv_cell[2])
        if cx < 0:
            cx = 0
        elif cx >= nx:
            cx = nx - 1
        if cy < 0:
            cy = 0
        elif cy >= ny:
            cy = ny - 1
        if cz < 0:
            cz = 0
        elif cz >= nz:
            cz = nz - 1
        cell_of[i] = (cx * ny + cy) * nz + cz
    start = np.zeros(ncell + 1, np.int64)
    for i in range(n):
        start[cell_of[i] + 1] += 1
    for c in range(ncell):
        start[c + 1] += start[c]
    cursor = start[:ncell].copy()
    parts = np.empty(n, np.int64)
    for i in range(n):
        c = cell_of[i]
        parts[cursor[c]] = i
        cursor[c] += 1
    return start, parts


# offset lists depend only on the grid geometry, which is constant across the
# steps of a periodic run; memoize them so per-step grid rebuilds stay O(N)
_OFFSET_CACHE: dict = {}


def _cached_offsets(grid: CellGrid):
    key = (
        tuple(int(c) for c in grid.cells_per_dim),
        tuple(float(s) for s in grid.cell_size),
        grid.cutoff,
        grid.periodic,
    )
    hit = _OFFSET_CACHE.get(key)
    if hit is None:
        if len(_OFFSET_CACHE) > 64:
            _OFFSET_CACHE.clear()
        pair = _canonical_pair_offsets(grid)
        triplet, same = _canonical_triplet_offsets(grid, pair)
        hit = (pair, triplet, same)
        _OFFSET_CACHE[key] = hit
    return hit


def build_cell_grid(system: ParticleSystem, cutoff: float) -> CellGrid:
    """Bin all particles into a cell grid sized by the cutoff.

    Cells per dimension are floor(box/cutoff), at least 1; the interaction
    reach is the number of cell layers the cutoff can span. Periodic systems
    require every box edge >= 2*cutoff so that minimum-image pair distances
    are unambiguous. For non-periodic systems whose particles have drifted
    outside the box the grid is enlarged to cover them.
    """
    if cutoff <= 0:
        raise ValidationError(f"cutoff must be > 0, got {cutoff}")
    box = system.box
    if system.periodic:
        if np.any(box < 2.0 * cutoff):
            raise ValidationError(
                f"periodic box {box} too small for minimum-image safety at "
                f"cutoff {cutoff}; every edge must be >= {2.0 * cutoff}"
            )
        origin = np.zeros(3)
        extent = box.copy()
    else:
        lo = np.minimum(system.positions.min(axis=0), 0.0)
        hi = np.maximum(system.positions.max(axis=0) + 1e-9, box)
        origin = lo
        extent = hi - lo
    cells = np.maximum(1, np.floor(extent / cutoff).astype(np.int64))
    size = extent / cells
    reach = np.maximum(1, np.ceil(cutoff / size - 1e-12).astype(np.int64))
    start, parts = _bin_particles(system.positions, origin, 1.0 / size, cells)
    grid = CellGrid(
        cells_per_dim=cells,
        cell_size=size,
        origin=origin,
        interaction_reach=reach,
        cutoff=float(cutoff),
        periodic=system.periodic,
        box=box.copy(),
        cell_start=start,
        cell_particles=parts,
        pair_cells=np.empty((0, 3), np.int64),
        triplet_patterns=np.empty((0, 2), np.int64),
        triplet_same_cell=np.empty(0, np.bool_),
    )
    grid.pair_cells, grid.triplet_patterns, grid.triplet_same_cell = _cached_offsets(grid)
    return grid


@njit(cache=True, parallel=True)
def _c01_pair_kernel(
    positions,
    box,
    periodic,
    cells_per_dim,
    cell_start,
    cell_parts,
    offsets,
    rc2,
    epsilon,
    sigma2,
    base_cells,
    forces,
    cell_energy,
    cell_virial,
    error_flags,
):
    nx, ny, nz = cells_per_dim[0], cells_per_dim[1], cells_per_dim[2]
    bx_half = 0.5 * box[0]
    by_half = 0.5 * box[1]
    bz_half = 0.5 * box[2]
    for t in prange(base_cells.shape[0]):
        cb = base_cells[t]
        cbx = cb // (ny * nz)
        cby = (cb // nz) % ny
        cbz = cb % nz
        e_acc = 0.0
        w_acc = 0.0
        for ii in range(cell_start[cb], cell_start[cb + 1]):
            i = cell_parts[ii]
            xi = positions[i, 0]
            yi = positions[i, 1]
            zi = positions[i, 2]
            fx = 0.0
            fy = 0.0
            fz = 0.0
            for o in range(offsets.shape[0]):
                cx = cbx + offsets[o, 0]
                cy = cby + offsets[o, 1]
                cz = cbz + offsets[o, 2]
                if periodic:
                    if cx >= nx:
                        cx -= nx
                    if cy >= ny:
                        cy -= ny
                    if cz >= nz:
                        cz -= nz
                else:
                    if cx < 0 or cx >= nx or cy < 0 or cy >= ny or cz < 0 or cz >= nz:
                        continue
                cc = (cx * ny + cy) * nz + cz
                for jj in range(cell_start[cc], cell_start[cc + 1]):
                    j = cell_parts[jj]
                    if j == i:
                        continue
                    dx = xi - positions[j, 0]
                    dy = yi - positions[j, 1]
                    dz = zi - positions[j, 2]
                    if periodic:
                        if dx > bx_half:
                            dx -= box[0]
                        elif dx < -bx_half:
                            dx += box[0]
                        if dy > by_half:
                            dy -= box[1]
                        elif dy < -by_half:
                            dy += box[1]
                        if dz > bz_half:
                            dz -= box[2]
                        elif dz < -bz_half:
                            dz += box[2]
                    r2 = dx * dx + dy * dy + dz * dz
                    if r2 > rc2:
                        continue
                    if r2 < MIN_DISTANCE_SQ:
                        error_flags[cb] = 1
                        continue
                    e, scale = lj_kernel(r2, epsilon, sigma2)
                    fx += scale * dx
                    fy += scale * dy
                    fz += scale * dz
                    e_acc += 0.5 * e
                    w_acc += 0.5 * scale * r2
            forces[i, 0] += fx
            forces[i, 1] += fy
            forces[i, 2] += fz
        cell_energy[cb] = e_acc
        cell_virial[cb] = w_acc


@njit(cache=True, parallel=True)
def _c01_triplet_kernel(
    positions,
    box,
    periodic,
    cells_per_dim,
    cell_start,
    cell_parts,
    neighbor_cells,
    patterns,
    same_cell,
    rc2,
    nu,
    base_cells,
    forces,
    cell_energy,
    cell_virial,
    error_flags,
):
    nx, ny, nz = cells_per_dim[0], cells_per_dim[1], cells_per_dim[2]
    bx_half = 0.5 * box[0]
    by_half = 0.5 * box[1]
    bz_half = 0.5 * box[2]
    third = 1.0 / 3.0
    n_neigh = neighbor_cells.shape[0]
    for t in prange(base_cells.shape[0]):
        cb = base_cells[t]
        cbx = cb // (ny * nz)
        cby = (cb // nz) % ny
        cbz = cb % nz
        # resolve the neighbor cells once per base cell; -1 marks cells
        # outside a non-periodic grid
        cell_ids = np.empty(n_neigh, np.int64)
        cand_max = 0
        for o in range(n_neigh):
            cx = cbx + neighbor_cells[o, 0]
            cy = cby + neighbor_cells[o, 1]
            cz = cbz + neighbor_cells[o, 2]
            if periodic:
                if cx >= nx:
                    cx -= nx
                if cy >= ny:
                    cy -= ny
                if cz >= nz:
                    cz -= nz
            elif cx < 0 or cx >= nx or cy < 0 or cy >= ny or cz < 0 or cz >= nz:
                cell_ids[o] = -1
                continue
            cc = (cx * ny + cy) * nz + cz
            cell_ids[o] = cc
            cand_max += cell_start[cc + 1] - cell_start[cc]
        surv_idx = np.empty(cand_max, np.int64)
        surv_dx = np.empty(cand_max)
        surv_dy = np.empty(cand_max)
        surv_dz = np.empty(cand_max)
        surv_r2 = np.empty(cand_max)
        cell_ptr = np.empty(n_neigh + 1, np.int64)
        e_acc = 0.0
        w_acc = 0.0
        for ii in range(cell_start[cb], cell_start[cb + 1]):
            i = cell_parts[ii]
            xi = positions[i, 0]
            yi = positions[i, 1]
            zi = positions[i, 2]
            # survivor lists: per neighbor cell, the particles within the
            # cutoff of i together with their displacement from i
            cursor = 0
            for o in range(n_neigh):
                cell_ptr[o] = cursor
                cc = cell_ids[o]
                if cc < 0:
                    continue
                for jj in range(cell_start[cc], cell_start[cc + 1]):
                    j = cell_parts[jj]
                    if j == i:
                        continue
                    dx = xi - positions[j, 0]
                    dy = yi - positions[j, 1]
                    dz = zi - positions[j, 2]
                    if periodic:
                        if dx > bx_half:
                            dx -= box[0]
                        elif dx < -bx_half:
                            dx += box[0]
                        if dy > by_half:
                            dy -= box[1]
                        elif dy < -by_half:
                            dy += box[1]
                        if dz > bz_half:
                            dz -= box[2]
                        elif dz < -bz_half:
                            dz += box[2]
                    r2 = dx * dx + dy * dy + dz * dz
                    if r2 > rc2:
                        continue
                    surv_idx[cursor] = j
                    surv_dx[cursor] = dx
                    surv_dy[cursor] = dy
                    surv_dz[cursor] = dz
                    surv_r2[cursor] = r2
                    cursor += 1
            cell_ptr[n_neigh] = cursor
            fx = 0.0
            fy = 0.0
            fz = 0.0
            for p in range(patterns.shape[0]):
                o1 = patterns[p, 0]
                o2 = patterns[p, 1]
                same = same_cell[p]
                for aa in range(cell_ptr[o1], cell_ptr[o1 + 1]):
                    j = surv_idx[aa]
                    dijx = surv_dx[aa]
                    dijy = surv_dy[aa]
                    dijz = surv_dz[aa]
                    a = surv_r2[aa]
                    # within one cell the survivors are in ascending index
                    # order, so starting behind aa enforces j < k exactly
                    start = aa + 1 if same else cell_ptr[o2]
                    for bb in range(start, cell_ptr[o2 + 1]):
                        k = surv_idx[bb]
                        dikx = surv_dx[bb]
                        diky = surv_dy[bb]
                        dikz = surv_dz[bb]
                        b = surv_r2[bb]
                        djkx = positions[j, 0] - positions[k, 0]
                        djky = positions[j, 1] - positions[k, 1]
                        djkz = positions[j, 2] - positions[k, 2]
                        if periodic:
                            if djkx > bx_half:
                                djkx -= box[0]
                            elif djkx < -bx_half:
                                djkx += box[0]
                            if djky > by_half:
                                djky -= box[1]
                            elif djky < -by_half:
                                djky += box[1]
                            if djkz > bz_half:
                                djkz -= box[2]
                            elif djkz < -bz_half:
                                djkz += box[2]
                        c = djkx * djkx + djky * djky + djkz * djkz
                        if c > rc2:
                            continue
                        if a < MIN_DISTANCE_SQ or b < MIN_DISTANCE_SQ or c < MIN_DISTANCE_SQ:
                            error_flags[cb] = 1
                            continue
                        e, de_da, de_db, de_dc = atm_kernel(a, b, c, nu)
                        # only the force on the base particle is stored
                        fx += -2.0 * (de_da * dijx + de_db * dikx)
                        fy += -2.0 * (de_da * dijy + de_db * diky)
                        fz += -2.0 * (de_da * dijz + de_db * dikz)
                        e_acc += e * third
                        # triplet virial as the volume-scaling derivative
                        # -2 (dE/da a + dE/db b + dE/dc c); equals the usual
                        # sum of position-dot-force over the triplet whenever
                        # the minimum-image displacements close a triangle,
                        # and stays reference independent when they do not
                        w_acc += -2.0 * (de_da * a + de_db * b + de_dc * c) * third
            forces[i, 0] += fx
            forces[i, 1] += fy
            forces[i, 2] += fz
        cell_energy[cb] = e_acc
        cell_virial[cb] = w_acc


@njit(cache=True)
def _c01_triplet_visits_kernel(
    positions,
    box,
    periodic,
    cells_per_dim,
    cell_start,
    cell_parts,
    neighbor_cells,
    patterns,
    same_cell,
    rc2,
    base_cells,
    out,
):
    """Sequential companion of the triplet pass recording visited triplets.

    Appends one sorted (i, j, k) row per accepted kernel evaluation; returns
    the number of rows needed, which may exceed the buffer size.
    """
    nx, ny, nz = cells_per_dim[0], cells_per_dim[1], cells_per_dim[2]
    bx_half = 0.5 * box[0]
    by_half = 0.5 * box[1]
    bz_half = 0.5 * box[2]
    n_neigh = neighbor_cells.shape[0]
    count = 0
    for t in range(base_cells.shape[0]):
        cb = base_cells[t]
        cbx = cb // (ny * nz)
        cby = (cb // nz) % ny
        cbz = cb % nz
        cell_ids = np.empty(n_neigh, np.int64)
        cand_max = 0
        for o in range(n_neigh):
            cx = cbx + neighbor_cells[o, 0]
            cy = cby + neighbor_cells[o, 1]
            cz = cbz + neighbor_cells[o, 2]
            if periodic:
                if cx >= nx:
                    cx -= nx
                if cy >= ny:
                    cy -= ny
                if cz >= nz:
                    cz -= nz
            elif cx < 0 or cx >= nx or cy < 0 or cy >= ny or cz < 0 or cz >= nz:
                cell_ids[o] = -1
                continue
            cc = (cx * ny + cy) * nz + cz
            cell_ids[o] = cc
            cand_max += cell_start[cc + 1] - cell_start[cc]
        surv_idx = np.empty(cand_max, np.int64)
        cell_ptr = np.empty(n_neigh + 1, np.int64)
        for ii in range(cell_start[cb], cell_start[cb + 1]):
            i = cell_parts[ii]
            xi = positions[i, 0]
            yi = positions[i, 1]
            zi = positions[i, 2]
            cursor = 0
            for o in range(n_neigh):
                cell_ptr[o] = cursor
                cc = cell_ids[o]
                if cc < 0:
                    continue
                for jj in range(cell_start[cc], cell_start[cc + 1]):
                    j = cell_parts[jj]
                    if j == i:
                        continue
                    dx = xi - positions[j, 0]
                    dy = yi - positions[j, 1]
                    dz = zi - positions[j, 2]
                    if periodic:
                        if dx > bx_half:
                            dx -= box[0]
                        elif dx < -bx_half:
                            dx += box[0]
                        if dy > by_half:
                            dy -= box[1]
                        elif dy < -by_half:
                            dy += box[1]
                        if dz > bz_half:
                            dz -= box[2]
                        elif dz < -bz_half:
                            dz += box[2]
                    if dx * dx + dy * dy + dz * dz > rc2:
                        continue
                    surv_idx[cursor] = j
                    cursor += 1
            cell_ptr[n_neigh] = cursor
            for p in range(patterns.shape[0]):
                o1 = patterns[p, 0]
                o2 = patterns[p, 1]
                same = same_cell[p]
                for aa in range(cell_ptr[o1], cell_ptr[o1 + 1]):
                    j = surv_idx[aa]
                    start = aa + 1 if same else cell_ptr[o2]
                    for bb in range(start, cell_ptr[o2 + 1]):
                        k = surv_idx[bb]
                        djkx = positions[j, 0] - positions[k, 0]
                        djky = positions[j, 1] - positions[k, 1]
                        djkz = positions[j, 2] - positions[k, 2]
                        if periodic:
                            if djkx > bx_half:
                                djkx -= box[0]
                            elif djkx < -bx_half:
                                djkx += box[0]
                            if djky > by_half:
                                djky -= box[1]
                            elif djky < -by_half:
                                djky += box[1]
                            if djkz > bz_half:
                                djkz -= box[2]
                            elif djkz < -bz_half:
                                djkz += box[2]
                        if djkx * djkx + djky * djky + djkz * djkz > rc2:
                            continue
                        if count < out.shape[0]:
                            lo = min(i, min(j, k))
                            hi = max(i, max(j, k))
                            out[count, 0] = lo
                            out[count, 1] = i + j + k - lo - hi
                            out[count, 2] = hi
                        count += 1
    return count


@njit(cache=True, parallel=True)
def _direct_pair_kernel(positions, epsilon, sigma2, fbuf, ebuf, wbuf, error_flags):
    n = positions.shape[0]
    nchunk = fbuf.shape[0]
    for c in prange(nchunk):
        e_acc = 0.0
        w_acc = 0.0
        for i in range(c, n, nchunk):
            xi = positions[i, 0]
            yi = positions[i, 1]
            zi = positions[i, 2]
            for j in range(i + 1, n):
                dx = xi - positions[j, 0]
                dy = yi - positions[j, 1]
                dz = zi - positions[j, 2]
                r2 = dx * dx + dy * dy + dz * dz
                if r2 < MIN_DISTANCE_SQ:
                    error_flags[c] = 1
                    continue
                e, scale = lj_kernel(r2, epsilon, sigma2)
                fx = scale * dx
                fy = scale * dy
                fz = scale * dz
                fbuf[c, i, 0] += fx
                fbuf[c, i, 1] += fy
                fbuf[c, i, 2] += fz
                fbuf[c, j, 0] -= fx
                fbuf[c, j, 1] -= fy
                fbuf[c, j, 2] -= fz
                e_acc += e
                w_acc += scale * r2
        ebuf[c] = e_acc
        wbuf[c] = w_acc


@njit(cache=True, parallel=True)
def _direct_triplet_kernel(positions, nu, fbuf, ebuf, wbuf, error_flags):
    n = positions.shape[0]
    nchunk = fbuf.shape[0]
    for c in prange(nchunk):
        e_acc = 0.0
        w_acc = 0.0
        for i in range(c, n - 2, nchunk):
            xi = positions[i, 0]
            yi = positions[i, 1]
            zi = positions[i, 2]
            for j in range(i + 1, n - 1):
                dijx = xi - positions[j, 0]
                dijy = yi - positions[j, 1]
                dijz = zi - positions[j, 2]
                a = dijx * dijx + dijy * dijy + dijz * dijz
                for k in range(j + 1, n):
                    dikx = xi - positions[k, 0]
                    diky = yi - positions[k, 1]
                    dikz = zi - positions[k, 2]
                    djkx = positions[j, 0] - positions[k, 0]
                    djky = positions[j, 1] - positions[k, 1]
                    djkz = positions[j, 2] - positions[k, 2]
                    b = dikx * dikx + diky * diky + dikz * dikz
                    cc = djkx * djkx + djky * djky + djkz * djkz
                    if a < MIN_DISTANCE_SQ or b < MIN_DISTANCE_SQ or cc < MIN_DISTANCE_SQ:
                        error_flags[c] = 1
                        continue
                    e, de_da, de_db, de_dc = atm_kernel(a, b, cc, nu)
                    fbuf[c, i, 0] += -2.0 * (de_da * dijx + de_db * dikx)
                    fbuf[c, i, 1] += -2.0 * (de_da * dijy + de_db * diky)
                    fbuf[c, i, 2] += -2.0 * (de_da * dijz + de_db * dikz)
                    fbuf[c, j, 0] += 2.0 * de_da * dijx - 2.0 * de_dc * djkx
                    fbuf[c, j, 1] += 2.0 * de_da * dijy - 2.0 * de_dc * djky
                    fbuf[c, j, 2] += 2.0 * de_da * dijz - 2.0 * de_dc * djkz
                    fbuf[c, k, 0] += 2.0 * de_db * dikx + 2.0 * de_dc * djkx
                    fbuf[c, k, 1] += 2.0 * de_db * diky + 2.0 * de_dc * djky
                    fbuf[c, k, 2] += 2.0 * de_db * dikz + 2.0 * de_dc * djkz
                    e_acc += e
                    w_acc += -2.0 * (de_da * a + de_db * b + de_dc * cc)
        ebuf[c] = e_acc
        wbuf[c] = w_acc


def _check_flags(flags):
    if np.any(flags):
        raise MinimumSeparationError(
            "particles closer than the minimum separation guard; the "
            "configuration is (nearly) singular"
        )


def c01_pair_pass(grid: CellGrid, system: ParticleSystem, ff, base_cells=None):
    """Run the C01 pair traversal; returns (forces, energy, virial).

    Forces are accumulated onto base-cell particles only; each within-cutoff
    pair contributes phi2/2 and half its virial per visit and is visited once
    from each side.
    """
    forces = np.zeros((system.n, 3))
    if base_cells is None:
        base_cells = np.arange(grid.num_cells, dtype=np.int64)
    else:
        base_cells = np.asarray(base_cells, dtype=np.int64)
    cell_energy = np.zeros(grid.num_cells)
    cell_virial = np.zeros(grid.num_cells)
    flags = np.zeros(grid.num_cells, np.int64)
    _c01_pair_kernel(
        system.positions,
        grid.box,
        grid.periodic,
        grid.cells_per_dim,
        grid.cell_start,
        grid.cell_particles,
        grid.pair_cells,
        grid.cutoff * grid.cutoff,
        ff.epsilon,
        ff.sigma * ff.sigma,
        base_cells,
        forces,
        cell_energy,
        cell_virial,
        flags,
    )
    _check_flags(flags)
    return forces, float(np.sum(cell_energy)), float(np.sum(cell_virial))


def c01_triplet_pass(grid: CellGrid, system: ParticleSystem, ff, base_cells=None):
    """Run the C01 triplet traversal; returns (forces, energy, virial).

    For each base particle i and offset pattern (c1, c2), partners are j from
    c1 and k from c2 with j < k whenever both come from the same cell, so
    every within-cutoff triplet is evaluated exactly once per member. Only
    the force on i is stored; the energy is attributed as phi3/3 and the
    virial as one third of the triplet virial per visit.
    """
    forces = np.zeros((system.n, 3))
    if base_cells is None:
        base_cells = np.arange(grid.num_cells, dtype=np.int64)
    else:
        base_cells = np.asarray(base_cells, dtype=np.int64)
    cell_energy = np.zeros(grid.num_cells)
    cell_virial = np.zeros(grid.num_cells)
    flags = np.zeros(grid.num_cells, np.int64)
    _c01_triplet_kernel(
        system.positions,
        grid.box,
        grid.periodic,
        grid.cells_per_dim,
        grid.cell_start,
        grid.cell_particles,
        grid.pair_cells,
        grid.triplet_patterns,
        grid.triplet_same_cell,
        grid.cutoff * grid.cutoff,
        ff.nu,
        base_cells,
        forces,
        cell_energy,
        cell_virial,
        flags,
    )
    _check_flags(flags)
    return forces, float(np.sum(cell_energy)), float(np.sum(cell_virial))


def collect_triplet_visits(grid: CellGrid, system: ParticleSystem, base_cells=None) -> np.ndarray:
    """Instrumentation: sorted (i, j, k) rows, one per triplet kernel visit."""
    if base_cells is None:
        base_cells = np.arange(grid.num_cells, dtype=np.int64)
    else:
        base_cells = np.asarray(base_cells, dtype=np.int64)
    buf = np.empty((4096, 3), np.int64)
    while True:
        needed = _c01_triplet_visits_kernel(
            system.positions,
            grid.box,
            grid.periodic,
            grid.cells_per_dim,
            grid.cell_start,
            grid.cell_particles,
            grid.pair_cells,
            grid.triplet_patterns,
            grid.triplet_same_cell,
            grid.cutoff * grid.cutoff,
            base_cells,
            buf,
        )
        if needed <= buf.shape[0]:
            return buf[:needed].copy()
        buf = np.empty((needed, 3), np.int64)


def direct_sum_pairs(system: ParticleSystem, ff):
    """Evaluate every distinct pair without a cutoff; (forces, energy, virial)."""
    if system.periodic:
        raise ValidationError("DirectSum does not support periodic boundaries")
    fbuf = np.zeros((DIRECT_SUM_CHUNKS, system.n, 3))
    ebuf = np.zeros(DIRECT_SUM_CHUNKS)
    wbuf = np.zeros(DIRECT_SUM_CHUNKS)
    flags = np.zeros(DIRECT_SUM_CHUNKS, np.int64)
    _direct_pair_kernel(system.positions, ff.epsilon, ff.sigma * ff.sigma, fbuf, ebuf, wbuf, flags)
    _check_flags(flags)
    return fbuf.sum(axis=0), float(np.sum(ebuf)), float(np.sum(wbuf))


def direct_sum_triplets(system: ParticleSystem, ff):
    """Evaluate every distinct triplet without a cutoff; (forces, energy, virial)."""
    if system.periodic:
        raise ValidationError("DirectSum does not support periodic boundaries")
    fbuf = np.zeros((DIRECT_SUM_CHUNKS, system.n, 3))
    ebuf = np.zeros(DIRECT_SUM_CHUNKS)
    wbuf = np.zeros(DIRECT_SUM_CHUNKS)
    flags = np.zeros(DIRECT_SUM_CHUNKS, np.int64)
    _direct_triplet_kernel(system.positions, ff.nu, fbuf, ebuf, wbuf, flags)
    _check_flags(flags)
    return fbuf.sum(axis=0), float(np.sum(ebuf)), float(np.sum(wbuf))


class _ContainerBase:
    """Shared bookkeeping: scalar accumulators of the most recent passes."""

    def __init__(self):
        self.pair_energy = 0.0
        self.pair_virial = 0.0
        self.triplet_energy = 0.0
        self.triplet_virial = 0.0


class DirectSum(_ContainerBase):
    """All pairs and all triplets, no cutoff, non-periodic systems only."""

    name = "direct_sum"

    def pair_pass(self, system: ParticleSystem, ff) -> None:
        forces, energy, virial = direct_sum_pairs(system, ff)
        system.forces_2b[:] = forces
        self.pair_energy = energy
        self.pair_virial = virial

    def triplet_pass(self, system: ParticleSystem, ff) -> None:
        if ff.nu == 0.0:
            system.forces_3b[:] = 0.0
            self.triplet_energy = 0.0
            self.triplet_virial = 0.0
            return
        forces, energy, virial = direct_sum_triplets(system, ff)
        system.forces_3b[:] = forces
        self.triplet_energy = energy
        self.triplet_virial = virial


class LinkedCells(_ContainerBase):
    """Cutoff container running the C01 pair and triplet traversals.

    The grid is rebuilt from the current positions on every pass; its offset
    lists depend only on the grid geometry.
    """

    name = "linked_cells"

    def pair_pass(self, system: ParticleSystem, ff) -> None:
        grid = build_cell_grid(system, ff.cutoff)
        forces, energy, virial = c01_pair_pass(grid, system, ff)
        system.forces_2b[:] = forces
        self.pair_energy = energy
        self.pair_virial = virial

    def triplet_pass(self, system: ParticleSystem, ff) -> None:
        if ff.nu == 0.0:
            system.forces_3b[:] = 0.0
            self.triplet_energy = 0.0
            self.triplet_virial = 0.0
            return
        grid = build_cell_grid(system, ff.cutoff)
        forces, energy, virial = c01_triplet_pass(grid, system, ff)
        system.forces_3b[:] = forces
        self.triplet_energy = energy
        self.triplet_virial = virial


def make_container(kind: str):
    if kind == "direct_sum":
        return DirectSum()
    if kind == "linked_cells":
        return LinkedCells()
    raise ValidationError(f"unknown container kind {kind!r}")
