"""Integer-matrix toral automorphisms and their exact spectral data.

Eigenvalue classification is decided on the exact integer characteristic
polynomial, not on floating-point matrix eigensolvers: unit-circle membership
for a root of an irreducible integer factor is settled algebraically (an
irreducible factor of degree >= 2 has roots on the circle only if it is
palindromic, and then the count follows from real-root isolation of its
Chebyshev-type transform on [-2, 2]).  High-precision numeric roots are used
for moduli and bases, cross-checked against the algebraic counts; any
disagreement raises instead of silently picking a side.
"""

from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
import sympy
from scipy.linalg import schur

from . import leaf as leaf_mod
from .dynamics import TorusMap, wrap
from .errors import (
    ClassificationAmbiguityError,
    DimensionMismatchError,
    NotUnimodularError,
    NoUnstableDirectionError,
    UnsupportedDimensionError,
)

MAX_DIMENSION = 8
_ROOT_DPS = 60


def _as_int_rows(entries):
    m = np.asarray(entries)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError("automorphism entries must form a square matrix")
    if not np.all(np.equal(np.mod(m, 1), 0)):
        raise NotUnimodularError("automorphism entries must be integers")
    return [[int(v) for v in row] for row in m]


def _int_matmul(a, b):
    n = len(a)
    return [[sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)]
            for i in range(n)]


def _int_identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def characteristic_polynomial(entries):
    """Exact monic characteristic polynomial det(xI - A), descending coefficients.

    Faddeev-LeVerrier over arbitrary-precision integers; every division in the
    recurrence is exact and asserted.  Dimensions up to 8 are supported.
    """
    a = _as_int_rows(entries)
    d = len(a)
    if d > MAX_DIMENSION:
        raise UnsupportedDimensionError(f"supported dimension is d <= {MAX_DIMENSION}")
    coeffs = [1]
    m = a
    c = -sum(m[i][i] for i in range(d))
    coeffs.append(c)
    for k in range(2, d + 1):
        shifted = [[m[i][j] + (c if i == j else 0) for j in range(d)] for i in range(d)]
        m = _int_matmul(a, shifted)
        tr = sum(m[i][i] for i in range(d))
        if tr % k != 0:
            raise ArithmeticError("Faddeev-LeVerrier trace not divisible; integer input expected")
        c = -tr // k
        coeffs.append(c)
    return coeffs


def _fraction_inverse(a):
    """Exact inverse of an integer matrix with |det| = 1 (Gauss over Q)."""
    n = len(a)
    aug = [[Fraction(a[i][j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)]
           for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise NotUnimodularError("matrix is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv_p = 1 / aug[col][col]
        aug[col] = [v * inv_p for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [vr - f * vc for vr, vc in zip(aug[r], aug[col])]
    out = [[aug[i][n + j] for j in range(n)] for i in range(n)]
    if any(v.denominator != 1 for row in out for v in row):
        raise NotUnimodularError("inverse is not integral; |det| != 1")
    return [[int(v) for v in row] for row in out]


# --- factor-level algebra ---------------------------------------------------


def _is_palindromic(coeffs):
    return list(coeffs) == list(reversed(coeffs))


def _dickson_transform(coeffs):
    """For palindromic p of degree 2m, the integer q with p(x) = x^m q(x + 1/x)."""
    deg = len(coeffs) - 1
    m = deg // 2
    # D_k(y) represents x^k + x^{-k}; recurrence D_k = y*D_{k-1} - D_{k-2}.
    d_prev = [2]            # D_0
    d_cur = [1, 0]          # D_1 = y
    q = [0] * (m + 1)

    def add(poly, scale):
        off = m + 1 - len(poly)
        for i, v in enumerate(poly):
            q[off + i] += scale * v

    add([1], coeffs[m])
    if m >= 1:
        add(d_cur, coeffs[m - 1])
    for k in range(2, m + 1):
        d_next = [0] * (len(d_cur) + 1)
        for i, v in enumerate(d_cur):
            d_next[i] += v
        for i, v in enumerate(d_prev):
            d_next[i + 2] -= v
        # d_next = y * d_cur - d_prev, coefficients descending
        d_prev, d_cur = d_cur, d_next
        add(d_cur, coeffs[m - k])
    return [int(v) for v in q]


def _unit_circle_root_count(coeffs):
    """Exact number of roots of an irreducible integer factor on |z| = 1."""
    deg = len(coeffs) - 1
    if deg == 1:
        return 1 if abs(coeffs[1]) == 1 else 0
    if not _is_palindromic(coeffs):
        return 0
    if deg % 2 == 1:
        # palindromic odd-degree polynomials vanish at -1, contradicting
        # irreducibility at degree >= 2
        raise ArithmeticError("odd-degree palindromic factor cannot be irreducible")
    y = sympy.symbols("y")
    q = sympy.Poly(_dickson_transform(coeffs), y)
    return 2 * q.count_roots(-2, 2)


def _is_cyclotomic(coeffs, dim):
    """Whether the irreducible factor is a cyclotomic polynomial Phi_k, k <= 2d^2."""
    x = sympy.symbols("x")
    target = sympy.Poly(coeffs, x)
    deg = len(coeffs) - 1
    for k in range(1, 2 * dim * dim + 1):
        phi = sympy.Poly(sympy.cyclotomic_poly(k, x), x)
        if phi.degree() == deg and phi == target:
            return True
    return False


def _factor_roots(coeffs):
    """High-precision simple roots of an irreducible integer factor."""
    with mpmath.workdps(_ROOT_DPS):
        roots = mpmath.polyroots([mpmath.mpf(c) for c in coeffs],
                                 maxsteps=200, extraprec=120)
        return [(complex(r), float(abs(r))) for r in roots]


@dataclass(frozen=True)
class FactorData:
    """One irreducible factor of the characteristic polynomial."""

    coefficients: tuple
    multiplicity: int
    unit_circle_roots: int
    is_cyclotomic: bool
    roots: tuple            # (complex value, classification in {"u","c","s"})

    @property
    def degree(self):
        return len(self.coefficients) - 1


@dataclass(frozen=True)
class SpectralSplitting:
    """E^u/E^c/E^s decomposition of an integer automorphism."""

    eigenvalues: tuple      # (complex value, algebraic multiplicity, class)
    factors: tuple
    dim_unstable: int
    dim_center: int
    dim_stable: int
    basis_u: np.ndarray
    basis_c: np.ndarray
    basis_s: np.ndarray
    projection_u: np.ndarray
    projection_c: np.ndarray
    projection_s: np.ndarray

    @property
    def dimension(self):
        return self.dim_unstable + self.dim_center + self.dim_stable

    def unstable_eigenvalue(self):
        """The expanding eigenvalue when E^u is one-dimensional."""
        if self.dim_unstable != 1:
            raise NoUnstableDirectionError("unstable subspace is not one-dimensional")
        lam = [ev for ev, _, cls in self.eigenvalues if cls == "u"][0]
        return float(lam.real)

    def unstable_unit_vector(self):
        if self.dim_unstable != 1:
            raise NoUnstableDirectionError("unstable subspace is not one-dimensional")
        v = self.basis_u[:, 0]
        lead = v[np.argmax(np.abs(v) > 1e-12)]
        return v / np.linalg.norm(v) * (1.0 if lead >= 0 else -1.0)


def _classify_factor_roots(coeffs, n_circle, tol):
    roots = _factor_roots(coeffs)
    by_gap = sorted(range(len(roots)), key=lambda i: abs(roots[i][1] - 1.0))
    classes = [None] * len(roots)
    numeric_center = sum(1 for _, m in roots if abs(m - 1.0) <= tol)
    if numeric_center != n_circle:
        raise ClassificationAmbiguityError(
            f"factor {coeffs}: numeric tolerance classification finds "
            f"{numeric_center} center roots, algebraic test finds {n_circle}",
            numeric=numeric_center, algebraic=n_circle)
    for rank, i in enumerate(by_gap):
        _, modulus = roots[i]
        if rank < n_circle:
            classes[i] = "c"
        else:
            classes[i] = "u" if modulus > 1.0 else "s"
    return [(roots[i][0], roots[i][1], classes[i]) for i in range(len(roots))]


def _ordered_invariant_basis(a_float, dim_part, predicate):
    d = a_float.shape[0]
    if dim_part == 0:
        return np.zeros((d, 0))
    if dim_part == d:
        return np.eye(d)
    _, z, sdim = schur(a_float, output="real", sort=predicate)
    if sdim != dim_part:
        raise ClassificationAmbiguityError(
            f"Schur reordering selected {sdim} directions, expected {dim_part}")
    return z[:, :dim_part]


def spectral_split(A, tol=1e-9):
    """Split R^d into the unstable/center/stable subspaces of the automorphism.

    tol > 0 is the numeric classification band around the unit circle; the
    numeric verdict is cross-checked against the exact algebraic test and a
    mismatch raises ClassificationAmbiguityError carrying both verdicts.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    entries = A.int_rows if isinstance(A, IntegerAutomorphism) else _as_int_rows(A)
    auto = A if isinstance(A, IntegerAutomorphism) else IntegerAutomorphism(entries)
    d = len(entries)
    x = sympy.symbols("x")
    poly = sympy.Poly(auto.char_poly, x, domain="ZZ")
    _, factor_list = poly.factor_list()

    factors = []
    eigenvalues = []
    for fac, mult in sorted(factor_list, key=lambda fm: (fm[0].degree(), fm[0].all_coeffs())):
        coeffs = [int(c) for c in fac.all_coeffs()]
        n_circle = _unit_circle_root_count(coeffs)
        cyc = _is_cyclotomic(coeffs, d)
        classified = _classify_factor_roots(coeffs, n_circle, tol)
        factors.append(FactorData(
            coefficients=tuple(coeffs),
            multiplicity=int(mult),
            unit_circle_roots=n_circle,
            is_cyclotomic=cyc,
            roots=tuple((val, cls) for val, _, cls in classified),
        ))
        for val, modulus, cls in classified:
            eigenvalues.append((val, modulus, int(mult), cls))

    dim_u = sum(m for _, _, m, cls in eigenvalues if cls == "u")
    dim_c = sum(m for _, _, m, cls in eigenvalues if cls == "c")
    dim_s = sum(m for _, _, m, cls in eigenvalues if cls == "s")
    assert dim_u + dim_c + dim_s == d

    a_float = np.array(entries, dtype=float)
    moduli_u = [m for _, m, _, cls in eigenvalues if cls == "u"]
    moduli_c = [m for _, m, _, cls in eigenvalues if cls == "c"]
    moduli_s = [m for _, m, _, cls in eigenvalues if cls == "s"]

    thr_u = None
    if moduli_u:
        below = max(moduli_c + moduli_s) if (moduli_c or moduli_s) else 1.0
        thr_u = float(np.sqrt(min(moduli_u) * below))
    thr_s = None
    if moduli_s:
        above = min(moduli_c + moduli_u) if (moduli_c or moduli_u) else 1.0
        thr_s = float(np.sqrt(max(moduli_s) * above))

    basis_u = _ordered_invariant_basis(
        a_float, dim_u,
        (lambda re, im: re * re + im * im > thr_u**2) if thr_u else None)
    basis_s = _ordered_invariant_basis(
        a_float, dim_s,
        (lambda re, im: re * re + im * im < thr_s**2) if thr_s else None)
    lo = thr_s**2 if thr_s else 0.0
    hi = thr_u**2 if thr_u else np.inf
    basis_c = _ordered_invariant_basis(
        a_float, dim_c,
        lambda re, im: lo < re * re + im * im < hi)

    s_full = np.hstack([basis_u, basis_c, basis_s])
    s_inv = np.linalg.inv(s_full)
    proj_u = basis_u @ s_inv[:dim_u]
    proj_c = basis_c @ s_inv[dim_u:dim_u + dim_c]
    proj_s = basis_s @ s_inv[dim_u + dim_c:]

    for name, basis in (("u", basis_u), ("c", basis_c), ("s", basis_s)):
        if basis.shape[1]:
            image = a_float @ basis
            resid = image - basis @ (np.linalg.pinv(basis) @ image)
            if np.abs(resid).max() > 1e-8:
                raise ClassificationAmbiguityError(
                    f"E^{name} basis invariance residual too large")

    return SpectralSplitting(
        eigenvalues=tuple((val, m, cls) for val, _, m, cls in eigenvalues),
        factors=tuple(factors),
        dim_unstable=dim_u,
        dim_center=dim_c,
        dim_stable=dim_s,
        basis_u=basis_u,
        basis_c=basis_c,
        basis_s=basis_s,
        projection_u=proj_u,
        projection_c=proj_c,
        projection_s=proj_s,
    )


@dataclass(frozen=True)
class ToralClassification:
    kind: str               # hyperbolic | partially_hyperbolic | quasiunipotent
    ergodic: bool
    dim_unstable: int
    dim_center: int
    dim_stable: int

    def to_dict(self):
        return {
            "kind": self.kind,
            "ergodic": self.ergodic,
            "dim_unstable": self.dim_unstable,
            "dim_center": self.dim_center,
            "dim_stable": self.dim_stable,
        }


def classify(A, tol=1e-9):
    """Hyperbolicity class and ergodicity of the automorphism.

    Quasiunipotent means no expanding direction (then no contracting one
    either, since |det| = 1); ergodicity is the exact no-cyclotomic-factor
    test, equivalent to no eigenvalue being a root of unity.
    """
    split = A.splitting(tol) if isinstance(A, IntegerAutomorphism) else spectral_split(A, tol)
    if split.dim_center == 0:
        kind = "hyperbolic"
    elif split.dim_unstable == 0:
        kind = "quasiunipotent"
    else:
        kind = "partially_hyperbolic"
    ergodic = not any(f.is_cyclotomic for f in split.factors)
    return ToralClassification(
        kind=kind,
        ergodic=ergodic,
        dim_unstable=split.dim_unstable,
        dim_center=split.dim_center,
        dim_stable=split.dim_stable,
    )


def exact_entropy(A, tol=1e-9):
    """Closed-form topological entropy: sum of log|lambda| over |lambda| > 1.

    Equals log|det(A restricted to E^u)|; exactly 0.0 when there is no
    expanding spectrum.
    """
    split = A.splitting(tol) if isinstance(A, IntegerAutomorphism) else spectral_split(A, tol)
    if split.dim_unstable == 0:
        return 0.0
    with mpmath.workdps(_ROOT_DPS):
        total = mpmath.mpf(0)
        for fac in split.factors:
            roots = mpmath.polyroots([mpmath.mpf(c) for c in fac.coefficients],
                                     maxsteps=200, extraprec=120)
            for r, (_, cls) in zip(roots, fac.roots):
                if cls == "u":
                    total += fac.multiplicity * mpmath.log(abs(r))
        return float(total)


@dataclass(frozen=True)
class LeafPatch:
    """Flat 2-D unstable patch {x + s u1 + t u2 : ||(s,t)|| < delta} (linear maps)."""

    basepoint: np.ndarray
    basis: np.ndarray       # (d, 2)
    delta: float

    def sample_points(self, resolution=33):
        ts = np.linspace(-self.delta, self.delta, resolution)
        s, t = np.meshgrid(ts, ts, indexing="ij")
        keep = s**2 + t**2 < self.delta**2
        disp = np.outer(s[keep], self.basis[:, 0]) + np.outer(t[keep], self.basis[:, 1])
        return wrap(self.basepoint + disp)


def linear_unstable_leaf(A, x, delta, initial_spacing=None):
    """Local unstable leaf of a toral automorphism through x.

    One-dimensional E^u yields a LeafPolyline over t in [-delta, delta] along
    the expanding eigenvector; two-dimensional E^u yields a flat LeafPatch.
    """
    if delta <= 0:
        raise ValueError("delta must be > 0")
    split = A.splitting()
    if split.dim_unstable == 0:
        raise NoUnstableDirectionError("map has no unstable direction")
    if split.dim_unstable > 2:
        raise UnsupportedDimensionError(
            f"unstable dimension {split.dim_unstable} > 2 is not supported")
    x = wrap(np.asarray(x, dtype=float))
    if split.dim_unstable == 2:
        q, _ = np.linalg.qr(split.basis_u)
        return LeafPatch(basepoint=x, basis=q, delta=float(delta))
    direction = split.unstable_unit_vector()
    spacing = initial_spacing if initial_spacing is not None else delta / 8.0
    curve = leaf_mod.LeafCurve(base_lift=x, direction=direction)
    return leaf_mod.initial_segment(curve, delta, spacing)


class IntegerAutomorphism(TorusMap):
    """A toral automorphism induced by an integer matrix with |det| = 1."""

    def __init__(self, entries):
        rows = _as_int_rows(entries)
        d = len(rows)
        if d < 1:
            raise DimensionMismatchError("dimension must be >= 1")
        if d > MAX_DIMENSION:
            raise UnsupportedDimensionError(f"supported dimension is d <= {MAX_DIMENSION}")
        self.int_rows = rows
        self.char_poly = characteristic_polynomial(rows)
        det = (-1) ** d * self.char_poly[-1]
        if abs(det) != 1:
            raise NotUnimodularError(f"|det| = {abs(det)} != 1")
        self.determinant = det
        self.dimension = d
        self.entries = np.array(rows, dtype=np.int64)
        self._lift = self.entries.astype(float)
        self._inv_rows = _fraction_inverse(rows)
        self._inv_lift = np.array(self._inv_rows, dtype=float)
        self._splittings = {}

    def __repr__(self):
        return f"IntegerAutomorphism({self.int_rows})"

    def apply_lift(self, z):
        z = np.asarray(z, dtype=float)
        return z @ self._lift.T

    def jacobian(self, x):
        x = self._check_dimension(np.asarray(x, dtype=float))
        shape = x.shape[:-1] + (self.dimension, self.dimension)
        return np.broadcast_to(self._lift, shape).copy()

    def inverse_apply(self, y):
        y = self._check_dimension(np.asarray(y, dtype=float))
        return wrap(y @ self._inv_lift.T)

    def inverse(self):
        return IntegerAutomorphism(self._inv_rows)

    def power(self, k):
        """Exact integer power A^k as a new automorphism (k may be negative)."""
        if k == 0:
            return IntegerAutomorphism(_int_identity(self.dimension))
        base = self.int_rows if k > 0 else self._inv_rows
        out = _int_identity(self.dimension)
        for _ in range(abs(int(k))):
            out = _int_matmul(base, out)
        return IntegerAutomorphism(out)

    def splitting(self, tol=1e-9):
        if tol not in self._splittings:
            self._splittings[tol] = spectral_split(self, tol)
        return self._splittings[tol]

    def classification(self, tol=1e-9):
        return classify(self, tol)

    def unstable_direction_at(self, x):
        split = self.splitting()
        if split.dim_unstable != 1:
            raise NoUnstableDirectionError(
                "leaf operations need a one-dimensional unstable subspace")
        return split.unstable_unit_vector()


def identity_automorphism(d):
    return IntegerAutomorphism(_int_identity(d))


def parse_matrix_text(text):
    """Integer matrix from plain text: one row per line, whitespace separated."""
    rows = []
    for line in text.strip().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rows.append([int(tok) for tok in line.split()])
    if not rows or any(len(r) != len(rows) for r in rows):
        raise NotUnimodularError("matrix text must be a square integer array")
    return rows


CAT_MAP_ENTRIES = ((2, 1), (1, 1))
SALEM_QUARTIC_ENTRIES = ((0, 0, 0, -1), (1, 0, 0, 1), (0, 1, 0, 1), (0, 0, 1, 1))
