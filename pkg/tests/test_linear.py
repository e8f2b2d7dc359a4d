import numpy as np
import pytest

from torusdyn import (
    IntegerAutomorphism,
    LeafPatch,
    characteristic_polynomial,
    classify,
    exact_entropy,
    identity_automorphism,
    linear_unstable_leaf,
    parse_matrix_text,
    spectral_split,
)
from torusdyn.errors import (
    ClassificationAmbiguityError,
    NoUnstableDirectionError,
    NotUnimodularError,
    UnsupportedDimensionError,
)


def bisect_root(coeffs, lo, hi, iters=200):
    """Oracle: isolate a real polynomial root by plain bisection."""
    def p(x):
        out = 0.0
        for c in coeffs:
            out = out * x + c
        return out
    flo = p(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if flo * p(mid) <= 0:
            hi = mid
        else:
            lo = mid
            flo = p(lo)
    return 0.5 * (lo + hi)


class TestCharacteristicPolynomial:
    def test_identity_d2(self):
        assert characteristic_polynomial([[1, 0], [0, 1]]) == [1, -2, 1]

    def test_cat_map_hand_expansion(self):
        # det(xI - A) = (x-2)(x-1) - 1 = x^2 - 3x + 1
        assert characteristic_polynomial([[2, 1], [1, 1]]) == [1, -3, 1]

    def test_companion_recovers_quartic(self):
        quartic = [1, -1, -1, -1, 1]
        comp = [[0, 0, 0, -1], [1, 0, 0, 1], [0, 1, 0, 1], [0, 0, 1, 1]]
        assert characteristic_polynomial(comp) == quartic

    def test_rejects_oversized_dimension(self):
        with pytest.raises(UnsupportedDimensionError):
            characteristic_polynomial(np.eye(9, dtype=int))


class TestAutomorphismConstruction:
    def test_rejects_non_unimodular(self):
        with pytest.raises(NotUnimodularError):
            IntegerAutomorphism([[2, 0], [0, 1]])

    def test_rejects_non_integer(self):
        with pytest.raises(NotUnimodularError):
            IntegerAutomorphism([[1.5, 0], [0, 1]])

    def test_exact_inverse(self, cat):
        prod = np.array(cat.int_rows) @ np.array(cat._inv_rows)
        assert np.array_equal(prod, np.eye(2, dtype=int))

    def test_power_and_inverse_roundtrip(self, salem):
        a = np.array(salem.int_rows)
        assert np.array_equal(np.array(salem.power(3).int_rows), a @ a @ a)
        prod = np.array(salem.power(-1).int_rows) @ a
        assert np.array_equal(prod, np.eye(4, dtype=int))


class TestSpectralSplit:
    def test_cat_map_quadratic_formula(self, cat):
        split = cat.splitting()
        assert (split.dim_unstable, split.dim_center, split.dim_stable) == (1, 0, 1)
        lam = (3 + np.sqrt(5)) / 2
        assert split.unstable_eigenvalue() == pytest.approx(lam, abs=1e-12)

    def test_identity_is_all_center(self, identity2):
        split = identity2.splitting()
        assert split.dim_center == 2
        assert all(ev == pytest.approx(1.0) for ev, _, _ in split.eigenvalues)

    def test_salem_dims_and_center_pair(self, salem):
        split = salem.splitting()
        assert (split.dim_unstable, split.dim_center, split.dim_stable) == (1, 2, 1)
        # the center pair sits on the unit circle but is not a root of unity
        fac = split.factors[0]
        assert fac.unit_circle_roots == 2 and not fac.is_cyclotomic

    def test_bases_invariant_under_map(self, salem):
        split = salem.splitting()
        a = salem.entries.astype(float)
        for basis in (split.basis_u, split.basis_c, split.basis_s):
            if basis.shape[1] == 0:
                continue
            image = a @ basis
            resid = image - basis @ (np.linalg.pinv(basis) @ image)
            assert np.abs(resid).max() < 1e-8

    @pytest.mark.parametrize("fixture", ["cat", "salem", "block_unipotent", "identity2"])
    def test_projection_identities(self, fixture, request):
        split = request.getfixturevalue(fixture).splitting()
        projs = [split.projection_u, split.projection_c, split.projection_s]
        total = sum(projs)
        assert np.abs(total - np.eye(split.dimension)).max() < 1e-10
        for p in projs:
            assert np.abs(p @ p - p).max() < 1e-8

    @pytest.mark.parametrize("fixture", ["cat", "salem", "block_unipotent"])
    def test_projections_commute_with_map(self, fixture, request):
        auto = request.getfixturevalue(fixture)
        split = auto.splitting()
        a = auto.entries.astype(float)
        for p in (split.projection_u, split.projection_c, split.projection_s):
            assert np.abs(a @ p - p @ a).max() < 1e-8

    def test_oversized_tolerance_raises_ambiguity(self, cat):
        # a tolerance band swallowing genuine off-circle roots makes the
        # numeric verdict contradict the algebraic one
        with pytest.raises(ClassificationAmbiguityError) as exc:
            spectral_split(cat, tol=2.0)
        assert exc.value.numeric is not None and exc.value.algebraic is not None


class TestClassify:
    def test_cat_hyperbolic_ergodic(self, cat):
        record = classify(cat)
        assert record.kind == "hyperbolic" and record.ergodic

    def test_identity_quasiunipotent(self, identity2):
        record = classify(identity2)
        assert record.kind == "quasiunipotent" and not record.ergodic

    def test_salem_partially_hyperbolic_ergodic(self, salem):
        record = classify(salem)
        assert record.kind == "partially_hyperbolic" and record.ergodic

    def test_rotation_block_not_ergodic(self):
        record = classify(IntegerAutomorphism([[0, -1], [1, 0]]))
        assert record.kind == "quasiunipotent" and not record.ergodic

    def test_block_unipotent_partially_hyperbolic_not_ergodic(self, block_unipotent):
        record = classify(block_unipotent)
        assert record.kind == "partially_hyperbolic" and not record.ergodic


class TestExactEntropy:
    def test_identity_exactly_zero(self, identity2):
        assert exact_entropy(identity2) == 0.0

    def test_cat_map_golden_value(self, cat):
        assert exact_entropy(cat) == pytest.approx(np.log((3 + np.sqrt(5)) / 2), abs=1e-9)

    def test_salem_against_bisection_oracle(self, salem):
        lam = bisect_root([1.0, -1.0, -1.0, -1.0, 1.0], 1.5, 2.0)
        assert exact_entropy(salem) == pytest.approx(np.log(lam), abs=1e-10)

    def test_power_law(self, cat):
        h = exact_entropy(cat)
        for k in (1, 2, 3):
            assert exact_entropy(cat.power(k)) == pytest.approx(k * h, abs=1e-9)

    @pytest.mark.parametrize("fixture", ["cat", "salem"])
    def test_reciprocal_inverse_symmetry(self, fixture, request):
        auto = request.getfixturevalue(fixture)
        assert exact_entropy(auto.inverse()) == pytest.approx(exact_entropy(auto), abs=1e-9)

    @pytest.mark.parametrize("entries", [
        [[1, 0], [0, 1]],
        [[1, 1], [0, 1]],
        [[0, -1], [1, 0]],
        [[2, 1], [1, 1]],
        [[0, 0, 0, -1], [1, 0, 0, 1], [0, 1, 0, 1], [0, 0, 1, 1]],
    ])
    def test_zero_entropy_iff_no_unstable(self, entries):
        auto = IntegerAutomorphism(entries)
        has_u = auto.splitting().dim_unstable > 0
        h = exact_entropy(auto)
        assert (h == 0.0) == (not has_u)


class TestLinearUnstableLeaf:
    def test_cat_leaf_through_origin(self, cat):
        leaf = linear_unstable_leaf(cat, [0.0, 0.0], 0.1)
        assert leaf.arclength == pytest.approx(0.2, abs=1e-12)
        mid = leaf.params[leaf.basepoint_index]
        assert mid == pytest.approx(0.0)
        v = cat.splitting().unstable_unit_vector()
        chord = leaf.lifted[-1] - leaf.lifted[0]
        assert np.abs(np.cross(chord, v)) < 1e-12

    def test_rejects_nonpositive_delta(self, cat):
        with pytest.raises(ValueError):
            linear_unstable_leaf(cat, [0.0, 0.0], 0.0)

    def test_no_unstable_direction(self, identity2):
        with pytest.raises(NoUnstableDirectionError):
            linear_unstable_leaf(identity2, [0.0, 0.0], 0.1)

    def test_two_dimensional_unstable_gives_patch(self):
        # block diagonal: two independent cat maps -> dim E^u = 2
        auto = IntegerAutomorphism([[2, 1, 0, 0], [1, 1, 0, 0],
                                    [0, 0, 2, 1], [0, 0, 1, 1]])
        patch = linear_unstable_leaf(auto, np.zeros(4), 0.1)
        assert isinstance(patch, LeafPatch)
        pts = patch.sample_points(9)
        assert pts.shape[1] == 4 and len(pts) > 0


class TestMatrixText:
    def test_roundtrip(self, tmp_path):
        text = "2 1\n1 1\n"
        assert parse_matrix_text(text) == [[2, 1], [1, 1]]

    def test_rejects_ragged(self):
        with pytest.raises(NotUnimodularError):
            parse_matrix_text("1 2\n3\n")
