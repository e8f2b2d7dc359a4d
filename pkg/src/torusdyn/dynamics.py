"""Points of the d-torus, the map abstraction, orbits, and the Bowen metric.

All dynamics acts on canonical coordinates in [0,1)^d.  Maps are given by a
lift to R^d together with a pointwise Jacobian; both must accept arrays of
shape (..., d) and are evaluated without shared mutable state, so everything
here is safe to call concurrently.
"""

import numpy as np

from .errors import DimensionMismatchError


def wrap(coords):
    """Reduce coordinates to the canonical representative in [0,1)^d.

    `x % 1.0` can round to exactly 1.0 for tiny negative inputs, which would
    violate the half-open interval, so that case is snapped back to 0.
    """
    out = np.asarray(coords, dtype=float) % 1.0
    out = np.where(out >= 1.0, 0.0, out)
    return out


def torus_point(coords):
    """Build a canonical torus point (1-D float array with entries in [0,1))."""
    arr = np.atleast_1d(np.asarray(coords, dtype=float))
    if arr.ndim != 1 or arr.size < 1:
        raise DimensionMismatchError("a torus point is a 1-D sequence of d >= 1 reals")
    return wrap(arr)


class TorusMap:
    """A C^1 self-map of T^d described through a lift F: R^d -> R^d.

    Subclasses provide `apply_lift` and `jacobian`; `apply_lift` must commute
    with integer translations up to an integer matrix so that it descends to
    the torus.  `apply` renormalizes to [0,1) after every evaluation.
    """

    dimension: int

    def apply_lift(self, z):
        raise NotImplementedError

    def jacobian(self, x):
        """Jacobian matrices, shape (..., d, d), at canonical points x."""
        raise NotImplementedError

    def apply(self, x):
        return wrap(self.apply_lift(np.asarray(x, dtype=float)))

    def inverse_apply(self, y):
        raise NotImplementedError

    def _check_dimension(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dimension:
            raise DimensionMismatchError(
                f"point dimension {x.shape[-1]} != map dimension {self.dimension}"
            )
        return x


def torus_distance(x, y):
    """Wrapped sup-norm distance on T^d: min over integer translates of |x-y+k|_inf.

    Accepts broadcasting arrays of shape (..., d).  Each coordinate
    contributes at most 1/2.  The per-axis minimization is exact because the
    translate search decouples across axes.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise DimensionMismatchError(
            f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}"
        )
    d = np.abs(x - y) % 1.0
    d = np.minimum(d, 1.0 - d)
    return d.max(axis=-1)


def orbit(map_, x, n):
    """Forward orbit [x, f(x), ..., f^n(x)] as an (n+1, d) array."""
    if n < 0:
        raise ValueError("orbit length n must be >= 0")
    x = map_._check_dimension(np.asarray(x, dtype=float))
    out = np.empty((n + 1, map_.dimension))
    out[0] = wrap(x)
    for j in range(n):
        out[j + 1] = map_.apply(out[j])
    return out


def orbit_batch(map_, points, n):
    """Orbits of many points at once: (n+1, N, d) array, row j = f^j(points)."""
    pts = map_._check_dimension(np.asarray(points, dtype=float))
    pts = np.atleast_2d(pts)
    out = np.empty((n + 1,) + pts.shape)
    out[0] = wrap(pts)
    for j in range(n):
        out[j + 1] = map_.apply(out[j])
    return out


def bowen_distance(map_, n, x, y):
    """Bowen dynamical distance: max torus distance along the first n iterates.

    d_n(x, y) = max_{0 <= j < n} dist(f^j x, f^j y); monotone non-decreasing
    in n.
    """
    if n < 1:
        raise ValueError("bowen_distance requires n >= 1")
    x = map_._check_dimension(np.asarray(x, dtype=float))
    y = map_._check_dimension(np.asarray(y, dtype=float))
    px, py = wrap(x), wrap(y)
    best = torus_distance(px, py)
    for _ in range(n - 1):
        px, py = map_.apply(px), map_.apply(py)
        best = max(best, torus_distance(px, py))
    return float(best)


def jacobian_cocycle(map_, x, n):
    """Derivative cocycle D_x f^n = Df(f^{n-1}x) ... Df(x).

    Factors are accumulated left-to-right in orbit order, which fixes the
    floating-point evaluation order and keeps results reproducible.
    """
    if n < 1:
        raise ValueError("jacobian_cocycle requires n >= 1")
    x = map_._check_dimension(np.asarray(x, dtype=float))
    p = wrap(x)
    m = np.asarray(map_.jacobian(p), dtype=float)
    for _ in range(n - 1):
        p = map_.apply(p)
        m = np.asarray(map_.jacobian(p), dtype=float) @ m
    return m


def jacobian_cocycle_batch(map_, points, n):
    """Cocycle matrices for a batch of points: (N, d, d) array."""
    pts = np.atleast_2d(map_._check_dimension(np.asarray(points, dtype=float)))
    p = wrap(pts)
    m = np.asarray(map_.jacobian(p), dtype=float)
    for _ in range(n - 1):
        p = map_.apply(p)
        m = np.einsum("nij,njk->nik", np.asarray(map_.jacobian(p), dtype=float), m)
    return m
