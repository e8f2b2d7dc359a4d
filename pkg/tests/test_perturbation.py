import numpy as np
import pytest

from torusdyn import (
    BumpField,
    PerturbedMap,
    c1_distance_estimate,
    center_growth_profile,
    max_safe_amplitude,
    torus_distance,
    unstable_direction,
)
from torusdyn.errors import InvertibilityMarginError, NoUnstableDirectionError


class TestBumpField:
    def test_vanishes_outside_support(self, bump_field2, rng):
        pts = rng.random((500, 2))
        vals = bump_field2.value(pts)
        for c, r in zip(bump_field2.centers, bump_field2.radii):
            diff = (pts - c + 0.5) % 1.0 - 0.5
            outside = np.linalg.norm(diff, axis=1) >= r
            inside_any = np.zeros(len(pts), dtype=bool)
            for c2, r2 in zip(bump_field2.centers, bump_field2.radii):
                diff2 = (pts - c2 + 0.5) % 1.0 - 0.5
                inside_any |= np.linalg.norm(diff2, axis=1) < r2
            assert np.all(np.abs(vals[~inside_any]).max(initial=0.0) == 0.0)

    def test_jacobian_matches_finite_differences(self, bump_field2, rng):
        step = 1e-6
        for _ in range(20):
            x = rng.random(2)
            jac = bump_field2.jacobian(x)
            fd = np.empty((2, 2))
            for k in range(2):
                e = np.zeros(2)
                e[k] = step
                fd[:, k] = (bump_field2.value(x + e) - bump_field2.value(x - e)) / (2 * step)
            assert np.abs(jac - fd).max() < 1e-6

    def test_norm_bounds_hold_on_dense_grid(self, bump_field2):
        xs = np.linspace(0, 1, 101)
        grid = np.stack(np.meshgrid(xs, xs, indexing="ij"), axis=-1).reshape(-1, 2)
        sup_v, sup_j = bump_field2.norm_bounds()
        assert np.linalg.norm(bump_field2.value(grid), axis=1).max() <= sup_v + 1e-12
        jacs = bump_field2.jacobian(grid)
        assert np.linalg.norm(jacs, ord=2, axis=(1, 2)).max() <= sup_j + 1e-9

    def test_field_sup_norm_at_most_one(self, bump_field2, rng):
        pts = rng.random((10_000, 2))
        assert np.linalg.norm(bump_field2.value(pts), axis=1).max() <= 1.0

    def test_rejects_wrapping_radius(self):
        with pytest.raises(ValueError):
            BumpField([[0.5, 0.5]], [0.6], [[1.0, 0.0]])


class TestPerturbedMap:
    def test_zero_amplitude_matches_base(self, cat, bump_field2, rng):
        pm = PerturbedMap(cat, bump_field2, 0.0)
        pts = rng.random((50, 2))
        assert np.allclose(pm.apply(pts), cat.apply(pts))

    def test_amplitude_above_margin_rejected(self, cat, bump_field2):
        t_bad = max_safe_amplitude(cat, bump_field2, fraction=1.01)
        with pytest.raises(InvertibilityMarginError):
            PerturbedMap(cat, bump_field2, t_bad)

    def test_newton_inverse_roundtrip(self, perturbed_cat, rng):
        pts = rng.random((100, 2))
        back = perturbed_cat.inverse_apply(perturbed_cat.apply(pts))
        assert float(torus_distance(back, pts).max()) < 1e-10

    def test_lift_commutes_with_integer_translation(self, perturbed_cat, rng):
        z = rng.random(2)
        k = np.array([2.0, -1.0])
        a = perturbed_cat.base.entries.astype(float)
        assert np.allclose(perturbed_cat.apply_lift(z + k),
                           perturbed_cat.apply_lift(z) + a @ k, atol=1e-12)


class TestC1Distance:
    def test_identical_maps_zero(self, cat):
        assert c1_distance_estimate(cat, cat, sample_count=64) == 0.0

    def test_zero_amplitude_vs_base_zero(self, cat, bump_field2):
        pm = PerturbedMap(cat, bump_field2, 0.0)
        assert c1_distance_estimate(pm, cat, sample_count=256) == 0.0

    def test_below_analytic_upper_bound_and_near_dense_oracle(self, cat, bump_field2):
        pm = PerturbedMap(cat, bump_field2, 0.008)
        est = c1_distance_estimate(pm, cat, sample_count=10_000, seed=5)
        assert est <= pm.c1_upper_bound() + 1e-12
        # independent dense-grid maximization oracle
        xs = np.linspace(0, 1, 100, endpoint=False)
        grid = np.stack(np.meshgrid(xs, xs, indexing="ij"), axis=-1).reshape(-1, 2)
        gap = torus_distance(pm.apply(grid), cat.apply(grid))
        jac = pm.jacobian(grid) - cat.jacobian(grid)
        dense = float((gap + np.linalg.norm(jac, ord=2, axis=(1, 2))).max())
        assert est == pytest.approx(dense, rel=0.05)

    def test_monotone_in_amplitude(self, cat, bump_field2):
        vals = []
        for t in (0.0, 0.002, 0.004, 0.006, 0.008):
            pm = PerturbedMap(cat, bump_field2, t)
            vals.append(c1_distance_estimate(pm, cat, sample_count=512, seed=9))
        assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))

    def test_deterministic_given_seed(self, cat, bump_field2):
        pm = PerturbedMap(cat, bump_field2, 0.005)
        a = c1_distance_estimate(pm, cat, sample_count=333, seed=4)
        b = c1_distance_estimate(pm, cat, sample_count=333, seed=4)
        assert a == b


class TestUnstableDirection:
    def test_linear_map_reproduces_eigenvector(self, cat, rng):
        v0 = cat.splitting().unstable_unit_vector()
        for n_power in (1, 5, 20):
            v = unstable_direction(cat, rng.random(2), n_power)
            assert np.abs(v - v0).max() < 1e-10

    def test_doubled_power_self_consistency(self, perturbed_cat, rng):
        for _ in range(5):
            x = rng.random(2)
            v20 = unstable_direction(perturbed_cat, x, 20)
            v40 = unstable_direction(perturbed_cat, x, 40)
            angle = np.arccos(np.clip(np.abs(v20 @ v40), -1, 1))
            assert angle <= 1e-6

    def test_df_equivariance(self, perturbed_cat, rng):
        for _ in range(5):
            x = rng.random(2)
            u = unstable_direction(perturbed_cat, x, 25)
            push = perturbed_cat.jacobian(x) @ u
            push = push / np.linalg.norm(push)
            u_next = unstable_direction(perturbed_cat, perturbed_cat.apply(x), 25)
            angle = np.arccos(np.clip(np.abs(push @ u_next), -1, 1))
            assert angle <= 1e-5

    def test_requires_one_dimensional_unstable(self, identity2):
        with pytest.raises(NoUnstableDirectionError):
            unstable_direction(identity2, np.zeros(2), 5)


class TestCenterGrowth:
    def test_cat_has_no_center(self, cat):
        assert center_growth_profile(cat, 24).verdict == "no_center"

    def test_salem_center_bounded(self, salem):
        result = center_growth_profile(salem, 48)
        assert result.verdict == "bounded"
        assert result.max_growth < 2.0

    def test_unipotent_block_polynomial(self, block_unipotent):
        r48 = center_growth_profile(block_unipotent, 48)
        r96 = center_growth_profile(block_unipotent, 96)
        assert r48.verdict == "subexponential_polynomial_fit"
        assert r96.verdict == "subexponential_polynomial_fit"
        # fitted exponential rate decays toward zero with the horizon
        assert 0 < r96.fitted_rate < r48.fitted_rate

    def test_unipotent_growth_is_linear_oracle(self, block_unipotent):
        # closed form: the center block of A^n is [[1, n], [0, 1]]
        result = center_growth_profile(block_unipotent, 32)
        g_n = np.exp(np.array(result.curve.values))
        ns = np.array(result.curve.ns, dtype=float)
        expected = np.array([np.linalg.norm([[1, n], [0, 1]], ord=2) for n in ns])
        assert np.abs(g_n - expected).max() < 1e-6

    def test_linear_profile_sample_independent(self, salem):
        a = center_growth_profile(salem, 24, sample_count=4, seed=1)
        b = center_growth_profile(salem, 24, sample_count=64, seed=99)
        assert np.abs(np.array(a.curve.values) - np.array(b.curve.values)).max() < 1e-12

    def test_perturbed_map_stays_bounded(self, perturbed_cat, salem, bump_field2):
        # a perturbed Salem map keeps the bounded verdict at small amplitude
        field4 = BumpField([[0.3, 0.6, 0.1, 0.8]], [0.2], [[1.0, 0.0, 0.0, 0.0]])
        pm = PerturbedMap(salem, field4, 0.002)
        result = center_growth_profile(pm, 24, sample_count=16)
        assert result.verdict == "bounded"
        assert np.isfinite(result.bound_used)

    def test_envelope_constant_dominates_curve(self, salem):
        result = center_growth_profile(salem, 48)
        c_eps = result.envelope_constant(0.05)
        ns = np.array(result.curve.ns, dtype=float)
        g = np.exp(np.array(result.curve.values))
        assert np.all(g <= c_eps * np.exp(0.05 * ns) + 1e-12)
