import numpy as np
import pytest

from respamd.model import ForceField, ParticleSystem


def make_random_system(rng, n, box, periodic, min_sep=0.85):
    """Random positions with a minimum separation (rejection sampling)."""
    box = np.asarray(box, dtype=np.float64)
    system = ParticleSystem.empty(n, box, periodic=periodic)
    placed = 0
    guard2 = min_sep * min_sep
    while placed < n:
        cand = rng.uniform(0.0, box, size=3)
        d = system.positions[:placed] - cand
        if periodic:
            d -= box * np.floor(d / box + 0.5)
        if placed == 0 or np.min(np.sum(d * d, axis=1)) > guard2:
            system.positions[placed] = cand
            placed += 1
    return system


def random_triangle(rng, lo=0.8, hi=2.5):
    """Three points whose pairwise distances all lie in [lo, hi]."""
    while True:
        pts = rng.uniform(-2.0, 2.0, size=(3, 3))
        d = [np.linalg.norm(pts[a] - pts[b]) for a, b in ((0, 1), (0, 2), (1, 2))]
        if min(d) > lo and max(d) < hi:
            return pts


def finite_difference_gradient(f, x, h=1e-6):
    g = np.zeros(3)
    for axis in range(3):
        step = np.zeros(3)
        step[axis] = h
        g[axis] = (f(x + step) - f(x - step)) / (2.0 * h)
    return g


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def ff():
    return ForceField(epsilon=1.0, sigma=1.0, nu=0.7, cutoff=2.5)
