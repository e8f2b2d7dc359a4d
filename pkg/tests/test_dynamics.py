import itertools

import numpy as np
import pytest

from torusdyn import (
    bowen_distance,
    jacobian_cocycle,
    orbit,
    torus_distance,
    torus_point,
    wrap,
)
from torusdyn.dynamics import jacobian_cocycle_batch, orbit_batch
from torusdyn.errors import DimensionMismatchError


def brute_force_distance(x, y):
    """Oracle: explicit minimum over all 3^d integer translates."""
    d = len(x)
    best = np.inf
    for k in itertools.product((-1.0, 0.0, 1.0), repeat=d):
        best = min(best, np.max(np.abs(np.asarray(x) - np.asarray(y) + np.array(k))))
    return best


class TestTorusPoint:
    def test_canonical_range(self, rng):
        pts = rng.normal(size=(200, 3)) * 5
        canon = wrap(pts)
        assert np.all(canon >= 0.0) and np.all(canon < 1.0)

    def test_tiny_negative_wraps_to_zero(self):
        assert torus_point([-1e-20])[0] == 0.0

    def test_rejects_empty(self):
        with pytest.raises(DimensionMismatchError):
            torus_point([])


class TestTorusDistance:
    def test_wraparound_1d(self):
        assert torus_distance(torus_point([0.1]), torus_point([0.9])) == pytest.approx(0.2)

    def test_identity_case(self):
        x = torus_point([0.3, 0.8])
        assert torus_distance(x, x) == 0.0

    def test_matches_translate_bruteforce_3d(self, rng):
        for _ in range(50):
            x, y = rng.random(3), rng.random(3)
            assert torus_distance(x, y) == pytest.approx(brute_force_distance(x, y), abs=1e-14)

    def test_triangle_inequality(self, rng):
        x, y, z = rng.random((3, 10_000, 4))
        dxz = torus_distance(x, z)
        dxy = torus_distance(x, y)
        dyz = torus_distance(y, z)
        assert np.all(dxz <= dxy + dyz + 1e-12)

    def test_each_axis_contributes_at_most_half(self, rng):
        x, y = rng.random((2, 1000, 5))
        assert np.all(torus_distance(x, y) <= 0.5)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            torus_distance(np.zeros(2), np.zeros(3))


class TestOrbit:
    def test_zero_length(self, cat):
        out = orbit(cat, [0.3, 0.4], 0)
        assert out.shape == (1, 2)
        assert np.allclose(out[0], [0.3, 0.4])

    def test_identity_map(self, identity2):
        out = orbit(identity2, [0.2, 0.7], 5)
        assert np.allclose(out, np.tile([0.2, 0.7], (6, 1)))

    def test_cat_map_hand_iteration(self, cat):
        # (0.5, 0.5) -> (1.5, 1.0) mod 1 = (0.5, 0.0) -> (1.0, 0.5) mod 1 = (0.0, 0.5)
        out = orbit(cat, [0.5, 0.5], 2)
        assert np.allclose(out, [[0.5, 0.5], [0.5, 0.0], [0.0, 0.5]])

    def test_batch_agrees_with_single(self, cat, rng):
        pts = rng.random((7, 2))
        batch = orbit_batch(cat, pts, 4)
        for i, p in enumerate(pts):
            assert np.allclose(batch[:, i, :], orbit(cat, p, 4))


class TestBowenDistance:
    def test_single_step_reduces_to_distance(self, cat, rng):
        x, y = rng.random(2), rng.random(2)
        assert bowen_distance(cat, 1, x, y) == pytest.approx(float(torus_distance(x, y)))

    def test_identity_map_constant(self, identity2, rng):
        x, y = rng.random(2), rng.random(2)
        d0 = float(torus_distance(x, y))
        for n in (1, 3, 10):
            assert bowen_distance(identity2, n, x, y) == pytest.approx(d0)

    def test_cat_map_explicit_orbit_oracle(self, cat):
        x = np.array([0.0, 0.0])
        y = np.array([1e-4, 0.0])
        ox, oy = orbit(cat, x, 4), orbit(cat, y, 4)
        oracle = max(float(torus_distance(a, b)) for a, b in zip(ox, oy))
        assert bowen_distance(cat, 5, x, y) == pytest.approx(oracle)

    def test_monotone_in_n(self, cat, rng):
        for _ in range(20):
            x, y = rng.random(2), rng.random(2)
            vals = [bowen_distance(cat, n, x, y) for n in range(1, 8)]
            assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))


class TestJacobianCocycle:
    def test_single_step(self, perturbed_cat, rng):
        x = rng.random(2)
        assert np.allclose(jacobian_cocycle(perturbed_cat, x, 1),
                           perturbed_cat.jacobian(x))

    def test_linear_map_gives_matrix_power(self, cat, rng):
        x = rng.random(2)
        assert np.allclose(jacobian_cocycle(cat, x, 6),
                           np.linalg.matrix_power(cat.entries.astype(float), 6))

    def test_independent_stepwise_product(self, perturbed_cat, rng):
        x = rng.random(2)
        pts = orbit(perturbed_cat, x, 2)
        expected = (perturbed_cat.jacobian(pts[2])
                    @ perturbed_cat.jacobian(pts[1])
                    @ perturbed_cat.jacobian(pts[0]))
        assert np.allclose(jacobian_cocycle(perturbed_cat, x, 3), expected)

    def test_cocycle_identity(self, perturbed_cat, rng):
        for _ in range(10):
            x = rng.random(2)
            m, n = 3, 4
            lhs = jacobian_cocycle(perturbed_cat, x, m + n)
            fmx = orbit(perturbed_cat, x, m)[-1]
            rhs = jacobian_cocycle(perturbed_cat, fmx, n) @ jacobian_cocycle(perturbed_cat, x, m)
            assert np.abs(lhs - rhs).max() / np.abs(lhs).max() < 1e-10

    def test_batch_agrees(self, perturbed_cat, rng):
        pts = rng.random((5, 2))
        batch = jacobian_cocycle_batch(perturbed_cat, pts, 3)
        for i, p in enumerate(pts):
            assert np.allclose(batch[i], jacobian_cocycle(perturbed_cat, p, 3))


class TestMapInterface:
    @pytest.mark.parametrize("map_name", ["cat", "perturbed_cat", "salem"])
    def test_jacobian_matches_finite_differences(self, map_name, request, rng):
        map_ = request.getfixturevalue(map_name)
        d = map_.dimension
        step = 1e-6
        for _ in range(10):
            x = rng.random(d)
            jac = np.asarray(map_.jacobian(x), dtype=float)
            fd = np.empty((d, d))
            for k in range(d):
                e = np.zeros(d)
                e[k] = step
                fd[:, k] = (map_.apply_lift(x + e) - map_.apply_lift(x - e)) / (2 * step)
            assert np.abs(jac - fd).max() / max(np.abs(jac).max(), 1.0) < 1e-5

    @pytest.mark.parametrize("map_name", ["cat", "perturbed_cat", "salem"])
    def test_jacobian_determinant_never_vanishes(self, map_name, request, rng):
        map_ = request.getfixturevalue(map_name)
        pts = rng.random((200, map_.dimension))
        dets = np.linalg.det(np.asarray(map_.jacobian(pts), dtype=float))
        assert np.all(np.abs(dets) > 1e-3)
