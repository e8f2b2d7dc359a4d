"""Discretized pieces of one-dimensional unstable manifolds.

A leaf is carried as a polyline over a fixed parametrization gamma(t) of the
initial segment.  Vertices store lifted coordinates (continuous in the
covering space R^d), so consecutive segments are geodesic in the cover and
arclength is just the sum of lifted segment lengths.  Refinement during
growth pulls the midpoint parameter back to the initial segment and recomputes
its forward image, never interpolating in the image.
"""

from dataclasses import dataclass

import numpy as np

from .dynamics import wrap
from .errors import LeafBudgetError

DEFAULT_VERTEX_CAP = 5_000_000


@dataclass(frozen=True)
class LeafCurve:
    """Initial unstable segment t -> base + t * direction (lifted)."""

    base_lift: np.ndarray
    direction: np.ndarray

    def point_lift(self, t):
        t = np.asarray(t, dtype=float)
        return self.base_lift + np.multiply.outer(t, self.direction)


class LeafPolyline:
    """Adaptively refined image of an unstable segment under f^step.

    params are strictly increasing parameters on the initial segment; lifted
    holds F^step(gamma(t)) in the cover.  Wrapped vertices and integer lift
    offsets are derived views.
    """

    def __init__(self, curve, step, params, lifted, delta):
        params = np.asarray(params, dtype=float)
        lifted = np.asarray(lifted, dtype=float)
        if params.ndim != 1 or lifted.shape != (params.size, curve.direction.size):
            raise ValueError("inconsistent polyline arrays")
        if np.any(np.diff(params) <= 0):
            raise ValueError("leaf parameters must be strictly increasing")
        self.curve = curve
        self.step = int(step)
        self.params = params
        self.lifted = lifted
        self.delta = float(delta)
        self.basepoint_index = int(np.argmin(np.abs(params)))

    @property
    def dimension(self):
        return self.lifted.shape[1]

    @property
    def vertex_count(self):
        return self.params.size

    @property
    def vertices(self):
        """Canonical torus representatives of the vertices."""
        return wrap(self.lifted)

    @property
    def lift_offsets(self):
        return np.floor(self.lifted).astype(np.int64)

    def segment_lengths(self):
        return np.linalg.norm(np.diff(self.lifted, axis=0), axis=1)

    def cumulative_arclength(self):
        out = np.empty(self.params.size)
        out[0] = 0.0
        np.cumsum(self.segment_lengths(), out=out[1:])
        return out

    @property
    def arclength(self):
        return float(self.segment_lengths().sum())

    def arclength_at(self, t_values):
        """Arclength position of parameters t (linear interpolation on vertices)."""
        return np.interp(np.asarray(t_values, dtype=float), self.params,
                         self.cumulative_arclength())

    def point_at_arclength(self, s_values):
        """Wrapped leaf points at the given arclength positions."""
        cum = self.cumulative_arclength()
        s = np.clip(np.asarray(s_values, dtype=float), 0.0, cum[-1])
        idx = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, cum.size - 2)
        seg = cum[idx + 1] - cum[idx]
        frac = np.where(seg > 0, (s - cum[idx]) / np.where(seg > 0, seg, 1.0), 0.0)
        pts = self.lifted[idx] + frac[:, None] * (self.lifted[idx + 1] - self.lifted[idx])
        return wrap(pts)


def initial_segment(curve, delta, spacing):
    """Step-0 polyline over [-delta, delta] at roughly the given spacing."""
    if delta <= 0:
        raise ValueError("delta must be > 0")
    count = max(2, int(np.ceil(2.0 * delta / spacing)))
    params = np.linspace(-delta, delta, count + 1)
    return LeafPolyline(curve, 0, params, curve.point_lift(params), delta)


def _iterate_lift(map_, z, steps):
    for _ in range(steps):
        z = map_.apply_lift(z)
    return z


def grow_leaf(map_, leaf, steps, eps_geom, max_vertices=DEFAULT_VERTEX_CAP):
    """Image polyline after `steps` applications with adaptive bisection.

    Any segment whose lifted image exceeds eps_geom is split at the midpoint
    parameter (recomputed through the full orbit) until every gap is below
    threshold.  Vertex count grows like e^{chi_u * steps}; exceeding
    max_vertices raises LeafBudgetError naming the cap and the step reached.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if eps_geom <= 0:
        raise ValueError("eps_geom must be > 0")
    params = leaf.params.copy()
    lifted = leaf.lifted.copy()
    step = leaf.step
    for _ in range(steps):
        lifted = map_.apply_lift(lifted)
        step += 1
        while True:
            gaps = np.linalg.norm(np.diff(lifted, axis=0), axis=1)
            long = np.flatnonzero(gaps > eps_geom)
            if long.size == 0:
                break
            if params.size + long.size > max_vertices:
                raise LeafBudgetError(max_vertices, step)
            t_mid = 0.5 * (params[long] + params[long + 1])
            z_mid = _iterate_lift(map_, leaf.curve.point_lift(t_mid), step)
            params = np.insert(params, long + 1, t_mid)
            lifted = np.insert(lifted, long + 1, z_mid, axis=0)
    return LeafPolyline(leaf.curve, step, params, lifted, leaf.delta)


def unstable_segment(map_, x, delta, spacing=None):
    """Initial leaf through x along the map's unstable direction.

    Maps expose `unstable_direction_at`; for automorphisms this is the exact
    expanding eigenvector, for perturbed maps the cocycle-recovered direction.
    """
    direction = np.asarray(map_.unstable_direction_at(np.asarray(x, dtype=float)),
                           dtype=float)
    direction = direction / np.linalg.norm(direction)
    if spacing is None:
        spacing = delta / 8.0
    curve = LeafCurve(base_lift=wrap(np.asarray(x, dtype=float)), direction=direction)
    return initial_segment(curve, delta, spacing)
