import numpy as np
import pytest

from torusdyn import PerturbedMap, grow_leaf, linear_unstable_leaf, unstable_segment
from torusdyn.errors import LeafBudgetError


class TestPolylineBasics:
    def test_initial_segment_contains_basepoint_at_zero(self, cat):
        leaf = linear_unstable_leaf(cat, [0.25, 0.75], 0.1)
        assert leaf.params[leaf.basepoint_index] == pytest.approx(0.0)
        assert np.allclose(leaf.vertices[leaf.basepoint_index], [0.25, 0.75])

    def test_arclength_additive_over_segments(self, cat):
        leaf = grow_leaf(cat, linear_unstable_leaf(cat, [0.1, 0.2], 0.1), 3, 0.01)
        cum = leaf.cumulative_arclength()
        assert cum[0] == 0.0
        assert cum[-1] == pytest.approx(leaf.segment_lengths().sum(), abs=1e-12)
        assert np.all(np.diff(cum) >= 0)

    def test_lift_offsets_are_integers(self, cat):
        leaf = grow_leaf(cat, linear_unstable_leaf(cat, [0.1, 0.2], 0.1), 4, 0.01)
        offsets = leaf.lift_offsets
        assert offsets.dtype == np.int64
        assert np.allclose(leaf.lifted - offsets, leaf.vertices)


class TestGrowLeaf:
    def test_zero_steps_unchanged(self, cat):
        leaf = linear_unstable_leaf(cat, [0.0, 0.0], 0.1)
        same = grow_leaf(cat, leaf, 0, 0.01)
        assert np.array_equal(same.params, leaf.params)
        assert np.array_equal(same.lifted, leaf.lifted)

    def test_single_step_stretches_by_eigenvalue(self, cat):
        lam = cat.splitting().unstable_eigenvalue()
        leaf = linear_unstable_leaf(cat, [0.0, 0.0], 0.1)
        grown = grow_leaf(cat, leaf, 1, 0.01)
        assert grown.arclength / leaf.arclength == pytest.approx(lam, abs=1e-9)

    def test_n_step_arclength_closed_form(self, cat):
        lam = cat.splitting().unstable_eigenvalue()
        delta = 0.1
        leaf = linear_unstable_leaf(cat, [0.3, 0.4], delta)
        for n in (3, 6, 9):
            grown = grow_leaf(cat, leaf, n, 0.01)
            assert grown.arclength == pytest.approx(2 * delta * lam**n, rel=1e-6)

    def test_refinement_respects_gap_threshold(self, cat):
        grown = grow_leaf(cat, linear_unstable_leaf(cat, [0.0, 0.0], 0.1), 5, 0.02)
        assert grown.segment_lengths().max() <= 0.02 + 1e-12

    def test_vertex_cap_raises_resource_error(self, cat):
        leaf = linear_unstable_leaf(cat, [0.0, 0.0], 0.1)
        with pytest.raises(LeafBudgetError) as exc:
            grow_leaf(cat, leaf, 12, 0.001, max_vertices=5000)
        assert exc.value.cap == 5000 and 1 <= exc.value.step <= 12

    def test_perturbed_growth_factor_near_eigenvalue(self, cat, bump_field2):
        lam = cat.splitting().unstable_eigenvalue()
        factors = {}
        for t in (0.002, 0.004):
            pm = PerturbedMap(cat, bump_field2, t)
            leaf = unstable_segment(pm, [0.1, 0.6], 0.1)
            grown5 = grow_leaf(pm, leaf, 5, 0.005)
            grown6 = grow_leaf(pm, leaf, 6, 0.005)
            factors[t] = grown6.arclength / grown5.arclength
        # per-step stretch within O(t) of the linear eigenvalue
        for t, f in factors.items():
            assert abs(f - lam) < 20 * t

    def test_point_at_arclength_endpoints(self, cat):
        leaf = linear_unstable_leaf(cat, [0.0, 0.0], 0.1)
        pts = leaf.point_at_arclength([0.0, leaf.arclength])
        assert np.allclose(pts[0], leaf.vertices[0])
        assert np.allclose(pts[1], leaf.vertices[-1])
