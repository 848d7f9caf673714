import itertools
from fractions import Fraction

import numpy as np
import pytest

from respamd.model import ForceField, ValidationError
from respamd.potentials import (
    atm_energy,
    atm_forces,
    lj_energy,
    lj_force,
    within_cutoff_pair,
    within_cutoff_triplet,
)

from conftest import finite_difference_gradient, random_triangle


class TestLennardJones:
    def test_zero_at_sigma(self, ff):
        assert lj_energy(1.0, ff) == 0.0

    def test_minimum_depth_is_epsilon(self, ff):
        assert lj_energy(2.0 ** (1.0 / 6.0), ff) == pytest.approx(-1.0, abs=1e-15)

    def test_value_at_two_sigma(self, ff):
        # oracle: exact rational evaluation of 4[(1/2)^12 - (1/2)^6]
        exact = 4 * (Fraction(1, 2) ** 12 - Fraction(1, 2) ** 6)
        assert exact == Fraction(-63, 1024)
        assert lj_energy(2.0, ff) == float(exact)

    def test_rejects_nonpositive_distance(self, ff):
        with pytest.raises(ValidationError):
            lj_energy(0.0, ff)
        with pytest.raises(ValidationError):
            lj_energy(-1.0, ff)

    def test_force_vanishes_at_minimum(self, ff):
        d = np.array([2.0 ** (1.0 / 6.0), 0.0, 0.0])
        assert np.max(np.abs(lj_force(d, ff))) < 1e-12

    def test_force_antisymmetry(self, rng, ff):
        for _ in range(100):
            d = rng.uniform(-2.0, 2.0, size=3)
            if np.linalg.norm(d) < 0.5:
                continue
            assert np.array_equal(lj_force(d, ff), -lj_force(-d, ff))

    def test_force_matches_finite_differences(self, rng, ff):
        checked = 0
        worst = 0.0
        while checked < 1000:
            d = rng.uniform(-2.5, 2.5, size=3)
            r = np.linalg.norm(d)
            if not 0.8 <= r <= 2.5:
                continue
            analytic = lj_force(d, ff)
            grad = finite_difference_gradient(lambda x: lj_energy(np.linalg.norm(x), ff), d)
            worst = max(worst, np.max(np.abs(analytic + grad)) / np.max(np.abs(analytic)))
            checked += 1
        assert worst <= 1e-6

    def test_rejects_zero_displacement(self, ff):
        with pytest.raises(ValidationError):
            lj_force(np.zeros(3), ff)


class TestAxilrodTellerMuto:
    def test_equilateral_closed_form(self, ff):
        r = 1.3
        pts = (
            np.array([0.0, 0.0, 0.0]),
            np.array([r, 0.0, 0.0]),
            np.array([r / 2.0, r * np.sqrt(3.0) / 2.0, 0.0]),
        )
        assert atm_energy(*pts, ff) == pytest.approx(1.375 * ff.nu / r**9, rel=1e-12)

    def test_collinear_closed_form(self, ff):
        a, b = 0.9, 1.6
        pts = (
            np.array([0.0, 0.0, 0.0]),
            np.array([a, 0.0, 0.0]),
            np.array([a + b, 0.0, 0.0]),
        )
        expected = -2.0 * ff.nu / (a * b * (a + b)) ** 3
        assert atm_energy(*pts, ff) == pytest.approx(expected, rel=1e-12)

    def test_permutation_invariance(self, rng, ff):
        for _ in range(50):
            pts = random_triangle(rng)
            energies = [
                atm_energy(pts[p[0]], pts[p[1]], pts[p[2]], ff)
                for p in itertools.permutations(range(3))
            ]
            assert max(energies) - min(energies) <= 1e-12 * max(1.0, abs(energies[0]))

    def test_rejects_coincident_particles(self, ff):
        x = np.array([1.0, 1.0, 1.0])
        with pytest.raises(ValidationError):
            atm_energy(x, x, np.array([2.0, 2.0, 2.0]), ff)
        with pytest.raises(ValidationError):
            atm_forces(x, x, np.array([2.0, 2.0, 2.0]), ff)

    def test_forces_match_finite_differences(self, rng, ff):
        worst = 0.0
        for _ in range(1000):
            pts = random_triangle(rng)
            forces = atm_forces(pts[0], pts[1], pts[2], ff)
            for member, analytic in enumerate(forces):
                def energy_of(x, member=member):
                    moved = [p.copy() for p in pts]
                    moved[member] = x
                    return atm_energy(*moved, ff)

                grad = finite_difference_gradient(energy_of, pts[member])
                scale = max(np.max(np.abs(analytic)), 1e-12)
                worst = max(worst, np.max(np.abs(analytic + grad)) / scale)
        assert worst <= 1e-6

    def test_forces_sum_to_zero(self, rng, ff):
        for _ in range(200):
            pts = random_triangle(rng)
            f = atm_forces(pts[0], pts[1], pts[2], ff)
            assert np.max(np.abs(f.f_i + f.f_j + f.f_k)) <= 1e-12

    def test_equilateral_forces_point_through_centroid(self, ff):
        r = 1.1
        pts = np.array(
            [[0.0, 0.0, 0.0], [r, 0.0, 0.0], [r / 2.0, r * np.sqrt(3.0) / 2.0, 0.0]]
        )
        centroid = pts.mean(axis=0)
        forces = atm_forces(pts[0], pts[1], pts[2], ff)
        magnitudes = [np.linalg.norm(f) for f in forces]
        assert max(magnitudes) - min(magnitudes) <= 1e-12
        for point, force in zip(pts, forces):
            radial = point - centroid
            cosine = force @ radial / (np.linalg.norm(force) * np.linalg.norm(radial))
            assert abs(abs(cosine) - 1.0) <= 1e-12

    def test_rotation_equivariance(self, rng, ff):
        for _ in range(50):
            pts = random_triangle(rng)
            q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
            if np.linalg.det(q) < 0:
                q[:, 0] = -q[:, 0]
            base = atm_forces(pts[0], pts[1], pts[2], ff)
            rotated = atm_forces(*(pts @ q.T), ff)
            for f0, f1 in zip(base, rotated):
                assert np.max(np.abs(q @ f0 - f1)) <= 1e-10

    def test_translation_invariance(self, rng, ff):
        for _ in range(50):
            pts = random_triangle(rng)
            shift = rng.uniform(-5.0, 5.0, size=3)
            e0 = atm_energy(pts[0], pts[1], pts[2], ff)
            e1 = atm_energy(*(pts + shift), ff)
            assert abs(e0 - e1) <= 1e-12 * max(1.0, abs(e0))

    def test_zero_nu_means_zero_interaction(self, rng):
        ff0 = ForceField(nu=0.0)
        pts = random_triangle(rng)
        assert atm_energy(pts[0], pts[1], pts[2], ff0) == 0.0
        f = atm_forces(pts[0], pts[1], pts[2], ff0)
        assert np.all(f.f_i == 0.0) and np.all(f.f_j == 0.0) and np.all(f.f_k == 0.0)


class TestCutoffPredicates:
    def test_pair_boundary_inclusive(self):
        a = np.zeros(3)
        b = np.array([2.5, 0.0, 0.0])
        assert within_cutoff_pair(a, b, 2.5)
        assert not within_cutoff_pair(a, np.array([2.5 + 1e-9, 0.0, 0.0]), 2.5)

    def test_triplet_requires_all_three_sides(self):
        # two sides within, third out: no interaction
        i = np.zeros(3)
        j = np.array([2.0, 0.0, 0.0])
        k = np.array([-2.0, 0.0, 0.0])
        assert not within_cutoff_triplet(i, j, k, 2.5)
        assert within_cutoff_triplet(i, j, k, 4.0)

    def test_triplet_boundary_and_interior(self):
        i = np.zeros(3)
        j = np.array([2.5, 0.0, 0.0])
        k = np.array([1.25, 1.25 * np.sqrt(3.0), 0.0])
        assert within_cutoff_triplet(i, j, k, 2.5)
        close = [i, np.array([1.25, 0.0, 0.0]), np.array([0.625, 1.0, 0.0])]
        assert within_cutoff_triplet(*close, 2.5)

    def test_minimum_image_is_used_when_periodic(self):
        box = np.array([10.0, 10.0, 10.0])
        a = np.array([0.5, 5.0, 5.0])
        b = np.array([9.5, 5.0, 5.0])  # one length unit apart through the wall
        assert within_cutoff_pair(a, b, 1.5, box)
        assert not within_cutoff_pair(a, b, 1.5)
