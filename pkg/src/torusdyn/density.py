"""Effective density, rectangles, growth certificates, and mixing decay.

Everything in this module quantifies how fast iterated unstable leaves spread
over the torus: covering radii of wrapped leaf balls, hitting times of
shrinking product rectangles, counts of disjoint plaques inside an iterated
leaf (the sampled uniform-exponential-growth certificate), and the empirical
decay of leaf-against-volume correlations.

Conventions: ambient packing / covering distances use the wrapped sup-norm;
leaf lengths and subspace components use the Euclidean norm, matching the
arclength carried by LeafPolyline.  Membership tests for rectangles decompose
displacements through the base splitting's projections; products of a
rectangle's diameters stay below 1/2 so the canonical representative of a
displacement is the only candidate.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import distance_transform_cdt
from scipy.spatial import cKDTree

from .dynamics import wrap
from .errors import (
    ConfigError,
    NoUnstableDirectionError,
    ProbeBudgetError,
    SupportWrapError,
    UnsupportedDimensionError,
)
from .growth import fit_growth_curve
from .leaf import DEFAULT_VERTEX_CAP, grow_leaf, unstable_segment
from .linear import IntegerAutomorphism, classify
from .sampling import halton_points

DEFAULT_PROBE_CELL_BUDGET = 1 << 24
DEFAULT_LEAF_SAMPLE_BUDGET = 2_000_000_000


# --- smooth observables -------------------------------------------------------


def _smooth_step(s):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1, strictly increasing between."""
    s = np.asarray(s, dtype=float)
    a = np.zeros(s.shape)
    pos = s > 0
    a[pos] = np.exp(-1.0 / s[pos])
    b = np.zeros(s.shape)
    neg = s < 1
    b[neg] = np.exp(-1.0 / (1.0 - s[neg]))
    return a / (a + b)


def _smooth_step_derivative(s, h=1e-7):
    s = np.asarray(s, dtype=float)
    return (_smooth_step(s + h) - _smooth_step(s - h)) / (2.0 * h)


_STEP_GRID = np.linspace(0.0, 1.0, 100_001)
_STEP_DERIV_SUP = float(np.abs(_smooth_step_derivative(_STEP_GRID)).max())


@dataclass(frozen=True)
class SmoothObservable:
    """Closed-form observable on T^d with value/gradient callables and norms."""

    value: object
    gradient: object
    sup_norm: float
    gradient_sup_norm: float
    smoothness: str
    support_center: object = None
    support_radius: float = None

    def __call__(self, points):
        return self.value(points)


def bump_function(center, r, margin, order=2):
    """Plateau bump: identically 1 on B(center, r), 0 outside B(center, r + margin).

    B(., .) is the Euclidean ball on the torus.  The reported gradient bound is
    the actual supremum of the implemented profile, which scales like 1/margin;
    `order` is carried as a smoothness marker only (the profile is C-infinity,
    and no Sobolev norms are computed).
    """
    center = wrap(np.asarray(center, dtype=float))
    if r <= 0 or margin <= 0:
        raise ValueError("r and margin must be > 0")
    if r >= 0.25 or margin >= 0.25:
        raise ValueError("r and margin must stay below r0 = 0.25")
    if r + margin >= 0.5:
        raise SupportWrapError(
            f"support radius {r + margin} >= 1/2 wraps around the torus")

    def _dist(points):
        diff = (np.asarray(points, dtype=float) - center + 0.5) % 1.0 - 0.5
        return np.linalg.norm(diff, axis=-1), diff

    def value(points):
        dist, _ = _dist(points)
        return _smooth_step((r + margin - dist) / margin)

    def gradient(points):
        dist, diff = _dist(points)
        slope = -_smooth_step_derivative((r + margin - dist) / margin) / margin
        safe = np.where(dist > 1e-14, dist, 1.0)
        g = slope[..., None] * diff / safe[..., None]
        return np.where(dist[..., None] > 1e-14, g, 0.0)

    return SmoothObservable(
        value=value,
        gradient=gradient,
        sup_norm=1.0,
        gradient_sup_norm=_STEP_DERIV_SUP / margin,
        smoothness=f"C_inf (order marker l={order})",
        support_center=center,
        support_radius=r + margin,
    )


def constant_observable(c, dim):
    """Constant observable (useful as the degenerate mixing test case)."""
    cval = float(c)

    def value(points):
        pts = np.asarray(points, dtype=float)
        return np.full(pts.shape[:-1], cval)

    def gradient(points):
        pts = np.asarray(points, dtype=float)
        return np.zeros(pts.shape[:-1] + (dim,))

    return SmoothObservable(value=value, gradient=gradient, sup_norm=abs(cval),
                            gradient_sup_norm=0.0, smoothness="C_inf")


# --- covering radius ------------------------------------------------------------


@dataclass(frozen=True)
class CoveringRadius:
    value: float
    probe_error: float

    def __float__(self):
        return self.value


def covering_radius(points, probe_resolution, cell_budget=DEFAULT_PROBE_CELL_BUDGET):
    """Approximate covering radius of a sample set in the wrapped sup metric.

    Probes a grid of spacing `probe_resolution` through a periodic KD-tree;
    the reported value is exact on the probe grid, hence within probe_error =
    probe_resolution / 2 of the true covering radius.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] < 1:
        raise ValueError("points must be non-empty")
    if probe_resolution <= 0:
        raise ValueError("probe_resolution must be > 0")
    dim = pts.shape[1]
    n_cells = max(2, int(round(1.0 / probe_resolution)))
    if n_cells**dim > cell_budget:
        raise ProbeBudgetError(
            f"probe grid {n_cells}^{dim} exceeds cell budget {cell_budget}")
    h = 1.0 / n_cells
    axes = [(np.arange(n_cells) + 0.5) * h] * dim
    mesh = np.meshgrid(*axes, indexing="ij")
    probes = np.stack([m.ravel() for m in mesh], axis=1)
    tree = cKDTree(wrap(pts), boxsize=1.0)
    dists, _ = tree.query(probes, k=1, p=np.inf)
    return CoveringRadius(value=float(dists.max()), probe_error=h / 2.0)


# --- effective density of linear unstable balls -----------------------------------


def _occupancy_accumulate(occupancy, base_point, direction, t_start, t_stop, spacing,
                          chunk=1 << 22):
    """Mark probe cells visited by {base + t u : t in [t_start, t_stop)} mod 1."""
    g = occupancy.shape[0]
    total = max(1, int(math.ceil((t_stop - t_start) / spacing)))
    done = 0
    while done < total:
        m = min(chunk, total - done)
        ts = t_start + (done + np.arange(m)) * spacing
        pos = (base_point[None, :] + ts[:, None] * direction[None, :]) % 1.0
        idx = np.minimum((pos * g).astype(np.int64), g - 1)
        flat = idx[:, 0]
        for axis in range(1, idx.shape[1]):
            flat = flat * g + idx[:, axis]
        occupancy.ravel()[flat] = True
        done += m
    return total


def _wrapped_chessboard_distance(occupancy):
    """Max sup-norm grid distance to the occupied set, periodic via 3^d tiling."""
    dim = occupancy.ndim
    tiled = occupancy
    for axis in range(dim):
        tiled = np.concatenate([tiled, tiled, tiled], axis=axis)
    dist = distance_transform_cdt(~tiled, metric="chessboard")
    g = occupancy.shape[0]
    center = tuple(slice(g, 2 * g) for _ in range(dim))
    return int(dist[center].max())


def effective_density_profile(A, x, tau, n_values, probe_resolution=1.5625e-3,
                              sample_spacing=None, fit_window=None,
                              cell_budget=DEFAULT_PROBE_CELL_BUDGET,
                              sample_budget=DEFAULT_LEAF_SAMPLE_BUDGET):
    """Covering radius of the wrapped unstable ball B^u(tau^n) against n.

    For each n the leaf ball of radius tau^n through x is streamed onto an
    occupancy grid (nested balls accumulate incrementally) and the covering
    radius of the occupied set is computed by a periodic chessboard distance
    transform.  The returned curve carries log covering radius with a log-n
    fit, whose slope is the empirical density exponent.
    """
    if not isinstance(A, IntegerAutomorphism):
        raise TypeError("effective_density_profile expects an IntegerAutomorphism")
    record = classify(A)
    if not record.ergodic or record.dim_unstable < 1:
        raise ConfigError("effective density needs an ergodic map with E^u nonzero")
    if record.dim_unstable != 1:
        raise UnsupportedDimensionError(
            "profile sampling implemented for one-dimensional E^u")
    if A.dimension > 3:
        raise UnsupportedDimensionError("probe grids are feasible for d <= 3 only")
    if tau <= 1:
        raise ValueError("tau must be > 1")
    n_values = sorted(int(n) for n in n_values)
    g = max(2, int(round(1.0 / probe_resolution)))
    if g**A.dimension > cell_budget:
        raise ProbeBudgetError(f"probe grid {g}^{A.dimension} exceeds {cell_budget}")
    h = 1.0 / g
    spacing = sample_spacing if sample_spacing is not None else h
    if 2.0 * tau ** n_values[-1] / spacing > sample_budget:
        raise ProbeBudgetError(
            f"leaf sampling for n={n_values[-1]} exceeds sample budget {sample_budget}")

    direction = A.splitting().unstable_unit_vector()
    base = wrap(np.asarray(x, dtype=float))
    occupancy = np.zeros((g,) * A.dimension, dtype=bool)
    values = []
    prev_radius = 0.0
    for n in n_values:
        radius = tau**n
        _occupancy_accumulate(occupancy, base, direction, prev_radius, radius, spacing)
        _occupancy_accumulate(occupancy, base, -direction, prev_radius, radius, spacing)
        prev_radius = radius
        cov = _wrapped_chessboard_distance(occupancy) * h
        values.append(math.log(max(cov, h / 2.0)))
    window = fit_window if fit_window else (n_values[0], n_values[-1])
    probe_error = h + spacing / 2.0
    return fit_growth_curve(n_values, values, fit_window=window, x_scale="log",
                            metadata={"probe_resolution": h,
                                      "probe_error": probe_error,
                                      "tau": float(tau)})


# --- rectangles and hitting ---------------------------------------------------------


@dataclass(frozen=True)
class Rectangle:
    """Product neighborhood of x0: shrinking center-stable slab x unstable 2-delta ball."""

    basepoint: np.ndarray
    n: int
    eps: float
    delta: float
    center_stable_radius: float
    splitting: object = field(repr=False)

    def decompose(self, points):
        """Unstable coefficient and center-stable Euclidean norm of p - x0."""
        diff = (np.atleast_2d(np.asarray(points, dtype=float))
                - self.basepoint + 0.5) % 1.0 - 0.5
        split = self.splitting
        u_dir = split.unstable_unit_vector()
        u_comp = (split.projection_u @ diff.T).T
        u_coord = u_comp @ u_dir
        cs_comp = ((split.projection_c + split.projection_s) @ diff.T).T
        cs_norm = np.linalg.norm(cs_comp, axis=-1)
        return u_coord, cs_norm

    def contains(self, points):
        u_coord, cs_norm = self.decompose(points)
        return (np.abs(u_coord) < 2.0 * self.delta) & (cs_norm <= self.center_stable_radius)


def subexponential_constant(profile, eps):
    """Smallest C >= 1 with g_n <= C e^{n eps} over the sampled center growth."""
    if profile is None or profile.curve is None:
        return 1.0
    return profile.envelope_constant(eps)


def build_rectangle(map_or_auto, x0, n, eps, delta, profile=None):
    """(n, eps, delta)-rectangle about x0 with radius C_eps^{-1} e^{-n eps} delta / 2.

    C_eps comes from the map's center-growth profile; maps with empty center
    get C_eps = 1 and a purely stable slab.
    """
    base = map_or_auto.base if hasattr(map_or_auto, "base") else map_or_auto
    split = base.splitting()
    if split.dim_unstable != 1:
        raise NoUnstableDirectionError("rectangles need one-dimensional E^u")
    c_eps = subexponential_constant(profile, eps)
    radius = (delta / 2.0) * math.exp(-n * eps) / c_eps
    if 2.0 * delta + radius >= 0.5:
        raise ConfigError("rectangle diameter must stay below 1/2")
    return Rectangle(basepoint=wrap(np.asarray(x0, dtype=float)), n=int(n),
                     eps=float(eps), delta=float(delta),
                     center_stable_radius=float(radius), splitting=split)


@dataclass(frozen=True)
class RectangleHit:
    hit: bool
    plaque_center: object
    k: int
    leaf_arclength: float

    @property
    def verdict(self):
        return "hit_with_plaque" if self.hit else "miss"


def rectangle_hit(map_, x, rect, k, eps_geom=0.01, max_vertices=DEFAULT_VERTEX_CAP):
    """Whether f^k(W^u(x, delta)) crosses the rectangle with a full 2-delta plaque.

    A hit requires a leaf vertex inside the center-stable slab whose +-2 delta
    arclength neighborhood exists within the grown polyline (arclength
    coverage of the plaque's parameter interval); that vertex is returned as
    the plaque center.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    leaf0 = unstable_segment(map_, x, rect.delta, spacing=min(eps_geom, rect.delta / 8.0))
    grown = grow_leaf(map_, leaf0, k, eps_geom, max_vertices=max_vertices)
    _, cs_norm = rect.decompose(grown.vertices)
    cum = grown.cumulative_arclength()
    total = cum[-1]
    inside = (cs_norm <= rect.center_stable_radius) \
        & (cum >= 2.0 * rect.delta) & (total - cum >= 2.0 * rect.delta)
    idx = np.flatnonzero(inside)
    if idx.size == 0:
        return RectangleHit(hit=False, plaque_center=None, k=int(k),
                            leaf_arclength=float(total))
    center = grown.vertices[idx[0]]
    return RectangleHit(hit=True, plaque_center=center, k=int(k),
                        leaf_arclength=float(total))


def minimal_hitting_time(map_, x, rect, k_max, eps_geom=0.01,
                         max_vertices=DEFAULT_VERTEX_CAP):
    """Smallest k <= k_max with a plaque hit, or None."""
    for k in range(1, k_max + 1):
        if rectangle_hit(map_, x, rect, k, eps_geom, max_vertices).hit:
            return k
    return None


# --- uniform exponential growth certificate ------------------------------------------


@dataclass(frozen=True)
class UegCertificate:
    """Sampled-UEG certificate: min over basepoints of disjoint plaque counts.

    The paper-style property quantifies over every basepoint; this certificate
    checks a deterministic sample and reports the minimum, an honest
    relaxation flagged by `sampled`.
    """

    count: int
    required: float
    passed: bool
    witnesses: np.ndarray
    basepoint: np.ndarray
    rho: float
    delta: float
    n_steps: int
    sampled: bool = True

    def to_dict(self):
        return {
            "count": self.count,
            "required": self.required,
            "passed": self.passed,
            "rho": self.rho,
            "delta": self.delta,
            "n_steps": self.n_steps,
            "sampled": self.sampled,
            "witness_count": int(len(self.witnesses)),
        }


def _plaque_count(map_, x, delta, n_steps, eps_geom, max_vertices):
    leaf0 = unstable_segment(map_, x, delta, spacing=min(eps_geom, delta / 8.0))
    grown = grow_leaf(map_, leaf0, n_steps, eps_geom, max_vertices=max_vertices)
    total = grown.arclength
    if total < 4.0 * delta:
        return 0, np.zeros((0, map_.dimension)), total
    count = int(math.floor((total - 4.0 * delta) / (4.0 * delta))) + 1
    positions = 2.0 * delta + 4.0 * delta * np.arange(count)
    witnesses = grown.point_at_arclength(positions)
    return count, witnesses, total


def ueg_certificate(map_, rho, delta, h_ref, n_steps, basepoints=64,
                    eps_geom=0.01, max_vertices=DEFAULT_VERTEX_CAP, seed=0):
    """Certify e^{N (h - 3 rho)} disjoint 2-delta plaques inside f^N W^u(x, delta).

    Plaque centers are selected greedily along the image polyline at pairwise
    arclength >= 4 delta with 2-delta margins to both ends, which makes their
    plaques disjoint sub-arcs of one leaf.  The count is minimized over a
    Halton sample of basepoints.
    """
    if rho <= 0 or delta <= 0:
        raise ValueError("rho and delta must be > 0")
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    required = math.exp(n_steps * (h_ref - 3.0 * rho))
    if isinstance(basepoints, (int, np.integer)):
        points = halton_points(int(basepoints), map_.dimension, seed=seed)
    else:
        points = np.atleast_2d(np.asarray(basepoints, dtype=float))
    best = None
    for x in points:
        count, witnesses, _ = _plaque_count(map_, x, delta, n_steps, eps_geom,
                                            max_vertices)
        if best is None or count < best[0]:
            best = (count, witnesses, x)
    count, witnesses, arg_x = best
    return UegCertificate(count=count, required=required,
                          passed=count >= required, witnesses=witnesses,
                          basepoint=np.asarray(arg_x), rho=float(rho),
                          delta=float(delta), n_steps=int(n_steps))


# --- empirical mixing decay -----------------------------------------------------------


@dataclass(frozen=True)
class MixingDecay:
    alpha_fit: float
    residual_rms: float
    curve: object
    floor: float
    excluded: tuple
    verdict: str            # "decay_fit" | "indeterminate"
    correlations: tuple

    def to_dict(self):
        return {
            "alpha_fit": self.alpha_fit,
            "residual_rms": self.residual_rms,
            "floor": self.floor,
            "excluded": list(self.excluded),
            "verdict": self.verdict,
            "correlations": [[int(n), float(v)] for n, v in self.correlations],
        }


def _torus_integral(observable, dim, resolution):
    axes = [(np.arange(resolution) + 0.5) / resolution] * dim
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    return float(np.mean(observable(pts)))


def _leaf_correlations(A, x, delta, phi, psi, n_values, quad_h, phi_mean):
    """|int_leaf phi(f^n p) psi(p) dt - phi_mean int_leaf psi dt| per n (midpoint rule).

    Returns (values, scale) where scale is the magnitude of the product term,
    used to anchor the machine-precision part of the quadrature floor.
    """
    direction = A.splitting().unstable_unit_vector()
    base = wrap(np.asarray(x, dtype=float))
    count = int(math.ceil(2.0 * delta / quad_h))
    ts = -delta + (np.arange(count) + 0.5) * (2.0 * delta / count)
    weight = 2.0 * delta / count
    pts = (base[None, :] + ts[:, None] * direction[None, :]) % 1.0
    psi_vals = psi(pts)
    psi_integral = float(np.sum(psi_vals) * weight)
    out = []
    cur = pts
    step = 0
    for n in sorted(int(v) for v in n_values):
        while step < n:
            cur = wrap(cur @ A._lift.T)
            step += 1
        corr = float(np.sum(phi(cur) * psi_vals) * weight)
        out.append(abs(corr - phi_mean * psi_integral))
    return out, abs(phi_mean * psi_integral)


def mixing_decay_estimate(A, x, delta, phi, psi, n_values, quad_h=2e-5,
                          quad_g=512, fit_window=None):
    """Empirical decay rate of leaf-against-volume correlations.

    D_n = |int_{W^u(x,delta)} phi(f^n p) psi(p) dm^u - int phi dm *
    int_{W^u} psi dm^u| with composite midpoint quadrature on the leaf and a
    tensor midpoint rule on the torus.  Each D_n is recomputed at half the
    leaf step; values below 3x their own step-halving error are excluded from
    the decay fit and the overall floor is reported.  alpha_fit is minus the
    fitted slope of log D_n.
    """
    if not isinstance(A, IntegerAutomorphism):
        raise TypeError("mixing_decay_estimate expects an IntegerAutomorphism")
    record = classify(A)
    if not record.ergodic or record.kind == "quasiunipotent":
        raise ConfigError("mixing decay needs an ergodic (partially) hyperbolic map")
    n_values = sorted(int(v) for v in n_values)
    phi_mean = _torus_integral(phi, A.dimension, quad_g)
    coarse, scale = _leaf_correlations(A, x, delta, phi, psi, n_values, quad_h, phi_mean)
    fine, _ = _leaf_correlations(A, x, delta, phi, psi, n_values, quad_h / 2.0, phi_mean)
    # step-halving error per n, padded by a machine-precision term so exact
    # cancellations (constant phi) are excluded rather than fitted as signal
    machine_floor = 1e-13 * max(scale, 1e-3)
    errors = [max(abs(c - f), machine_floor) for c, f in zip(coarse, fine)]
    floor = max(errors)
    retained = [(n, v) for n, v, e in zip(n_values, fine, errors)
                if v > 3.0 * e]
    excluded = tuple(n for n in n_values if n not in {r[0] for r in retained})
    correlations = tuple((n, v) for n, v in zip(n_values, fine))
    if len(retained) < 2:
        return MixingDecay(alpha_fit=float("nan"), residual_rms=float("nan"),
                           curve=None, floor=floor, excluded=excluded,
                           verdict="indeterminate", correlations=correlations)
    ns = [n for n, _ in retained]
    logs = [math.log(v) for _, v in retained]
    window = fit_window if fit_window else (ns[0], ns[-1])
    window = (max(window[0], ns[0]), min(window[1], ns[-1]))
    curve = fit_growth_curve(ns, logs, fit_window=window,
                             metadata={"quad_h": quad_h, "quad_g": quad_g})
    return MixingDecay(alpha_fit=-curve.slope, residual_rms=curve.residual_rms,
                       curve=curve, floor=floor, excluded=excluded,
                       verdict="decay_fit", correlations=correlations)
