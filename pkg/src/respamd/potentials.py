"""Energy and analytic force kernels for the pair and triplet potentials.

The pair interaction is the Lennard-Jones 12-6 potential

    phi2(r) = 4 eps [ (sigma/r)^12 - (sigma/r)^6 ]

and the triplet interaction is the Axilrod-Teller-Muto triple-dipole term

    phi3 = nu [ 1 + 3 cos(ti) cos(tj) cos(tk) ] / (rij * rik * rjk)^3

with ti, tj, tk the interior angles of the particle triangle. The triplet
kernel works purely on the squared side lengths: with a = rij^2, b = rik^2,
c = rjk^2 the cosine product equals P / (8 a b c) where
P = (a+b-c)(a+c-b)(b+c-a), so

    phi3 = nu [ S^(-3/2) + (3/8) P S^(-5/2) ],   S = a b c.

That form is exactly permutation symmetric, needs no trigonometry, and its
partial derivatives with respect to a, b, c give the analytic forces. All
kernels are pure functions and safe for unrestricted concurrent use.
"""

from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np
from numba import njit

from respamd.model import ValidationError, as_vec3

# Below this separation the kernels refuse to evaluate instead of silently
# returning huge finite values or Inf; an integration blow-up then surfaces
# as an error at the point of failure.
MIN_DISTANCE = 1e-10
MIN_DISTANCE_SQ = MIN_DISTANCE * MIN_DISTANCE


class TripletForces(NamedTuple):
    """Analytic forces on the three members of a triplet; they sum to zero."""

    f_i: np.ndarray
    f_j: np.ndarray
    f_k: np.ndarray


@njit(cache=True)
def lj_energy_sq(r2, epsilon, sigma2):
    """Pair energy from the squared distance."""
    x = sigma2 / r2
    r6 = x * x * x
    return 4.0 * epsilon * (r6 * r6 - r6)


@njit(cache=True)
def lj_kernel(r2, epsilon, sigma2):
    """Pair energy and force scale from the squared distance.

    The force on particle i is scale * d where d = x_i - x_j, i.e.
    scale = 24 eps [2 (sigma/r)^12 - (sigma/r)^6] / r^2.
    """
    x = sigma2 / r2
    r6 = x * x * x
    r12 = r6 * r6
    energy = 4.0 * epsilon * (r12 - r6)
    scale = 24.0 * epsilon * (2.0 * r12 - r6) / r2
    return energy, scale


@njit(cache=True)
def atm_energy_sq(a, b, c, nu):
    """Triplet energy from the three squared side lengths."""
    u = a + b - c
    v = a + c - b
    w = b + c - a
    s = a * b * c
    inv_s = 1.0 / s
    s32 = inv_s / np.sqrt(s)
    return nu * (s32 + 0.375 * (u * v * w) * s32 * inv_s)


@njit(cache=True)
def atm_kernel(a, b, c, nu):
    """Triplet energy and its partial derivatives w.r.t. the squared sides.

    Returns (energy, dE/da, dE/db, dE/dc) for a = rij^2, b = rik^2,
    c = rjk^2. The forces follow from the chain rule:

        f_i = -2 (dE/da d_ij + dE/db d_ik)
        f_j = +2 dE/da d_ij - 2 dE/dc d_jk
        f_k = +2 dE/db d_ik + 2 dE/dc d_jk

    with d_ij = x_i - x_j, d_ik = x_i - x_k, d_jk = x_j - x_k.
    """
    u = a + b - c
    v = a + c - b
    w = b + c - a
    p = u * v * w
    s = a * b * c
    inv_s = 1.0 / s
    s32 = inv_s / np.sqrt(s)
    s52 = s32 * inv_s
    s72 = s52 * inv_s
    energy = nu * (s32 + 0.375 * p * s52)
    uv = u * v
    uw = u * w
    vw = v * w
    bc = b * c
    ac = a * c
    ab = a * b
    de_da = nu * ((0.375 * (vw + uw - uv) - 1.5 * bc) * s52 - 0.9375 * p * bc * s72)
    de_db = nu * ((0.375 * (vw - uw + uv) - 1.5 * ac) * s52 - 0.9375 * p * ac * s72)
    de_dc = nu * ((0.375 * (uw + uv - vw) - 1.5 * ab) * s52 - 0.9375 * p * ab * s72)
    return energy, de_da, de_db, de_dc


def displacement(x_a, x_b, box: Optional[np.ndarray] = None) -> np.ndarray:
    """x_a - x_b, per-component minimum image when a periodic box is given."""
    d = np.asarray(x_a, dtype=np.float64) - np.asarray(x_b, dtype=np.float64)
    if box is not None:
        box = np.asarray(box, dtype=np.float64)
        d -= box * np.floor(d / box + 0.5)
    return d


def _squared_sides(x_i, x_j, x_k, box):
    d_ij = displacement(x_i, x_j, box)
    d_ik = displacement(x_i, x_k, box)
    d_jk = displacement(x_j, x_k, box)
    return d_ij, d_ik, d_jk


def lj_energy(r: float, ff) -> float:
    """Pair potential at separation r (reduced units)."""
    if r <= 0:
        raise ValidationError(f"pair distance must be > 0, got {r}")
    if r < MIN_DISTANCE:
        raise ValidationError(f"pair distance {r} below the minimum separation guard")
    return float(lj_energy_sq(r * r, ff.epsilon, ff.sigma * ff.sigma))


def lj_force(disp_ij, ff, box: Optional[np.ndarray] = None) -> np.ndarray:
    """Force on particle i for displacement disp_ij = x_i - x_j."""
    d = displacement(disp_ij, np.zeros(3), box)
    r2 = float(d @ d)
    if r2 == 0.0:
        raise ValidationError("pair displacement must be nonzero")
    if r2 < MIN_DISTANCE_SQ:
        raise ValidationError("pair distance below the minimum separation guard")
    _, scale = lj_kernel(r2, ff.epsilon, ff.sigma * ff.sigma)
    return scale * d


def atm_energy(x_i, x_j, x_k, ff, box: Optional[np.ndarray] = None) -> float:
    """Triplet potential; invariant under any permutation of (i, j, k)."""
    d_ij, d_ik, d_jk = _squared_sides(x_i, x_j, x_k, box)
    a, b, c = float(d_ij @ d_ij), float(d_ik @ d_ik), float(d_jk @ d_jk)
    if min(a, b, c) < MIN_DISTANCE_SQ:
        raise ValidationError("triplet contains (nearly) coincident particles")
    return float(atm_energy_sq(a, b, c, ff.nu))


def atm_forces(x_i, x_j, x_k, ff, box: Optional[np.ndarray] = None) -> TripletForces:
    """Analytic triplet forces (negative energy gradient)."""
    d_ij, d_ik, d_jk = _squared_sides(x_i, x_j, x_k, box)
    a, b, c = float(d_ij @ d_ij), float(d_ik @ d_ik), float(d_jk @ d_jk)
    if min(a, b, c) < MIN_DISTANCE_SQ:
        raise ValidationError("triplet contains (nearly) coincident particles")
    _, de_da, de_db, de_dc = atm_kernel(a, b, c, ff.nu)
    f_i = -2.0 * (de_da * d_ij + de_db * d_ik)
    f_j = 2.0 * de_da * d_ij - 2.0 * de_dc * d_jk
    f_k = 2.0 * de_db * d_ik + 2.0 * de_dc * d_jk
    return TripletForces(f_i, f_j, f_k)


def within_cutoff_pair(x_i, x_j, cutoff: float, box: Optional[np.ndarray] = None) -> bool:
    """True when the (minimum-image) pair distance is <= cutoff, inclusive."""
    d = displacement(as_vec3(x_i, "x_i"), as_vec3(x_j, "x_j"), box)
    return float(d @ d) <= cutoff * cutoff


def within_cutoff_triplet(x_i, x_j, x_k, cutoff: float, box: Optional[np.ndarray] = None) -> bool:
    """True when all three (minimum-image) pair distances are <= cutoff."""
    d_ij, d_ik, d_jk = _squared_sides(x_i, x_j, x_k, box)
    c2 = cutoff * cutoff
    return float(d_ij @ d_ij) <= c2 and float(d_ik @ d_ik) <= c2 and float(d_jk @ d_jk) <= c2
