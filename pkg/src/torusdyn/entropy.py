"""Entropy-like estimators: separated sets, leaf counting, and Ruelle bounds.

Asymptotic limits are operationalized the same way everywhere: a growth curve
of log-counts against n is fitted over a declared window, and the eps -> 0
limit is replaced by a ladder with an explicit plateau rule (adjacent rungs
must agree within plateau_tol).  Greedy counts are lower bounds for the true
separated-set maxima, which is the right direction for every lower
semicontinuity exhibit in the experiment suite.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._greedy import greedy_bowen_count, greedy_leaf_count
from .dynamics import orbit_batch, wrap
from .errors import ConfigError, NoUnstableDirectionError
from .growth import GrowthCurve, fit_growth_curve
from .leaf import DEFAULT_VERTEX_CAP, grow_leaf, unstable_segment
from .linear import IntegerAutomorphism
from .sampling import halton_points

DEFAULT_PLATEAU_TOL = 0.05


# --- candidate sets ----------------------------------------------------------


def grid_points(resolution, dim):
    """Uniform grid of resolution^dim points with spacing 1/resolution."""
    axes = [np.arange(resolution) / resolution] * dim
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def candidate_points(dim, grid_resolution, max_candidates, seed=0):
    """Grid candidates when affordable, Halton otherwise (same per-axis density)."""
    if grid_resolution**dim <= max_candidates:
        return grid_points(grid_resolution, dim)
    return halton_points(int(max_candidates), dim, seed=seed)


# --- separated sets ----------------------------------------------------------


def count_separated(map_, n, eps, candidates):
    """Size of the greedy (n, eps)-separated subset of the candidate set.

    Greedy order is candidate order; the result is a lower bound on
    N(f, n, eps) restricted to the candidates.
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if n < 1:
        raise ValueError("n must be >= 1")
    cands = np.atleast_2d(np.asarray(candidates, dtype=float))
    if cands.shape[0] == 0:
        raise ValueError("candidate set must be non-empty")
    orbits = np.ascontiguousarray(
        np.transpose(orbit_batch(map_, cands, n - 1), (1, 0, 2)))
    count, _ = greedy_bowen_count(orbits, float(eps), n)
    return int(count)


def brute_force_separated_count(map_, n, eps, candidates, block=1024):
    """Oracle twin of count_separated built from the full pairwise matrix.

    Materializes Bowen distances blockwise and runs the same fixed-order
    greedy scan on boolean separation columns; intended for small candidate
    sets in tests.
    """
    cands = np.atleast_2d(np.asarray(candidates, dtype=float))
    n_cand = cands.shape[0]
    orbits = orbit_batch(map_, cands, n - 1)  # (n, N, d)
    alive = np.ones(n_cand, dtype=bool)
    count = 0
    for i in range(n_cand):
        if not alive[i]:
            continue
        count += 1
        for start in range(i + 1, n_cand, block):
            stop = min(start + block, n_cand)
            diff = np.abs(orbits[:, start:stop, :] - orbits[:, i : i + 1, :]) % 1.0
            diff = np.minimum(diff, 1.0 - diff)
            dists = diff.max(axis=(0, 2))
            alive[start:stop] &= dists > eps
    return count


# --- schedules and estimates --------------------------------------------------


@dataclass(frozen=True)
class EntropySchedule:
    """Sampling plan for a separated-set entropy estimate."""

    n_values: tuple
    epsilons: tuple             # strictly decreasing ladder
    grid_resolution: int = 200
    max_candidates: int = 60_000
    fit_window: tuple = None
    plateau_tol: float = DEFAULT_PLATEAU_TOL
    seed: int = 0

    def __post_init__(self):
        if len(self.epsilons) < 2:
            raise ConfigError("epsilon ladder needs at least two rungs")
        if any(b >= a for a, b in zip(self.epsilons, self.epsilons[1:])):
            raise ConfigError("epsilon ladder must be strictly decreasing")
        if len(self.n_values) < 2:
            raise ConfigError("need at least two n values")

    def window(self):
        return self.fit_window if self.fit_window else (self.n_values[0], self.n_values[-1])

    def to_dict(self):
        return {
            "n_values": list(self.n_values),
            "epsilons": list(self.epsilons),
            "grid_resolution": self.grid_resolution,
            "max_candidates": self.max_candidates,
            "fit_window": list(self.window()),
            "plateau_tol": self.plateau_tol,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class EntropyEstimate:
    """Plateau-ruled entropy value with full per-rung diagnostics."""

    value: float
    curves: tuple               # ((eps, GrowthCurve), ...)
    plateau_spread: float       # max - min slope across the ladder
    converged: bool
    metadata: dict = field(default_factory=dict, compare=False)

    @property
    def non_converged(self):
        return not self.converged

    def to_dict(self):
        return {
            "value": self.value,
            "converged": self.converged,
            "plateau_spread": self.plateau_spread,
            "curves": [{"eps": e, **c.to_dict()} for e, c in self.curves],
            "metadata": {k: v for k, v in self.metadata.items()
                         if isinstance(v, (int, float, str, bool, list, dict))},
        }


def _plateau_value(eps_slopes, plateau_tol):
    """Plateau rule: slope at the smallest eps agreeing with the next-smaller rung.

    eps_slopes is ordered with decreasing eps.  Returns (value, converged);
    when no adjacent pair agrees the smallest rung's slope is reported with
    converged=False.
    """
    for i in range(len(eps_slopes) - 1, 0, -1):
        eps_hi, slope_hi = eps_slopes[i - 1]
        _, slope_lo = eps_slopes[i]
        if abs(slope_hi - slope_lo) <= plateau_tol:
            return slope_hi, True
    return eps_slopes[-1][1], False


def estimate_topological_entropy(map_, schedule):
    """Separated-set topological entropy estimate under the given schedule.

    For each eps the curve of log greedy counts against n is fitted over the
    schedule window; the plateau rule across the eps ladder produces the
    value.  A failed plateau is reported through the converged flag, never as
    an exception.
    """
    eps_min = min(schedule.epsilons)
    per_axis = (schedule.grid_resolution
                if schedule.grid_resolution**map_.dimension <= schedule.max_candidates
                else schedule.max_candidates ** (1.0 / map_.dimension))
    if per_axis < 4.0 / eps_min:
        raise ConfigError(
            f"candidate density {per_axis:.1f}/axis below 4 per eps-cell "
            f"({4.0 / eps_min:.1f}) for eps={eps_min}")
    cands = candidate_points(map_.dimension, schedule.grid_resolution,
                             schedule.max_candidates, seed=schedule.seed)
    n_max = max(schedule.n_values)
    orbits = np.ascontiguousarray(
        np.transpose(orbit_batch(map_, cands, n_max - 1), (1, 0, 2)))
    curves = []
    slopes = []
    for eps in schedule.epsilons:
        counts = [greedy_bowen_count(orbits, float(eps), int(n))[0]
                  for n in schedule.n_values]
        curve = fit_growth_curve(schedule.n_values, np.log(counts),
                                 fit_window=schedule.window())
        curves.append((float(eps), curve))
        slopes.append((float(eps), curve.slope))
    value, converged = _plateau_value(slopes, schedule.plateau_tol)
    spread = max(s for _, s in slopes) - min(s for _, s in slopes)
    return EntropyEstimate(
        value=float(max(value, 0.0)),
        curves=tuple(curves),
        plateau_spread=float(spread),
        converged=converged,
        metadata={"candidates": int(cands.shape[0]),
                  "schedule": schedule.to_dict()},
    )


# --- leaf-based estimators ------------------------------------------------------


def estimate_unstable_volume_growth(map_, x, delta, n_max, eps_geom=0.01,
                                    fit_window=None, delta_max=0.25,
                                    max_vertices=DEFAULT_VERTEX_CAP):
    """Arclength growth curve of the iterated unstable segment through x.

    The fitted slope over the window is the chi_u(x, delta) estimate; for a
    toral automorphism it reproduces the closed-form entropy because the leaf
    stretches by exactly the expanding eigenvalue each step.
    """
    if delta > delta_max:
        raise ValueError(f"delta {delta} exceeds configured delta_max {delta_max}")
    leaf = unstable_segment(map_, x, delta, spacing=min(eps_geom, delta / 8.0))
    ns, logs = [], []
    current = leaf
    for n in range(1, n_max + 1):
        current = grow_leaf(map_, current, 1, eps_geom, max_vertices=max_vertices)
        ns.append(n)
        logs.append(math.log(current.arclength))
    window = fit_window if fit_window else (max(1, min(3, n_max - 1)), n_max)
    return fit_growth_curve(ns, logs, fit_window=window,
                            metadata={"delta": delta, "eps_geom": eps_geom,
                                      "final_vertices": current.vertex_count})


def _leaf_arclength_rows(map_, x, delta, n, eps_geom, max_vertices, sample_spacing):
    """Arclength positions of parameter samples on each of the first n polylines.

    Returns (params, rows) with rows[j] the arclength of each sample on the
    step-j image, j = 0..n-1; rows are non-decreasing along the sample axis.
    """
    leaf = unstable_segment(map_, x, delta, spacing=min(eps_geom, delta / 8.0))
    count = max(8, int(np.ceil(2.0 * delta / sample_spacing)))
    params = np.linspace(-delta, delta, count + 1)
    rows = np.empty((n, params.size))
    current = leaf
    rows[0] = current.arclength_at(params)
    for j in range(1, n):
        current = grow_leaf(map_, current, 1, eps_geom, max_vertices=max_vertices)
        rows[j] = current.arclength_at(params)
    return params, rows


def count_u_separated(map_, x, delta, n, eps, leaf_samples=None, eps_geom=0.01,
                      max_vertices=DEFAULT_VERTEX_CAP, sample_refinement=4):
    """Greedy (n, eps) u-separated count inside the leaf ball W^u(x, delta).

    The iterated leaf metric between samples is the arclength along the grown
    polyline between their tracked images (never the ambient distance).  When
    leaf_samples is None the sample spacing adapts to the observed stretch so
    the finest separation scale stays resolved; sample_refinement sets how
    many samples land inside one eps gap (>= 4; the greedy jump overshoots
    eps by at most one sample, so larger values tighten the lower bound at
    linear memory cost).  An explicit integer forces that many uniform
    samples, validated against the eps/4 density bound.
    """
    if eps <= 0 or delta <= 0 or n < 1:
        raise ValueError("need eps > 0, delta > 0, n >= 1")
    if sample_refinement < 4:
        raise ValueError("sample_refinement must be >= 4 (spacing <= eps/4)")
    if leaf_samples is None:
        probe = unstable_segment(map_, x, delta, spacing=delta / 8.0)
        grown = grow_leaf(map_, probe, n - 1, eps_geom, max_vertices=max_vertices) \
            if n > 1 else probe
        stretch = max(grown.arclength / (2.0 * delta), 1.0)
        spacing = min(eps / sample_refinement, eps / (sample_refinement * stretch))
    else:
        spacing = 2.0 * delta / int(leaf_samples)
        if spacing > eps / 4.0:
            raise ValueError(
                f"leaf_samples too sparse: spacing {spacing:.4g} > eps/4 = {eps / 4.0:.4g}")
    _, rows = _leaf_arclength_rows(map_, x, delta, n, eps_geom, max_vertices, spacing)
    return int(greedy_leaf_count(np.ascontiguousarray(rows), float(eps), n))


@dataclass(frozen=True)
class UnstableEntropySchedule:
    n_values: tuple
    epsilons: tuple
    delta: float = 0.1
    eps_geom: float = 0.01
    x_sample_count: int = 4
    plateau_tol: float = DEFAULT_PLATEAU_TOL
    max_vertices: int = DEFAULT_VERTEX_CAP
    seed: int = 0

    def window(self):
        return (self.n_values[0], self.n_values[-1])

    def to_dict(self):
        return {
            "n_values": list(self.n_values),
            "epsilons": list(self.epsilons),
            "delta": self.delta,
            "eps_geom": self.eps_geom,
            "x_sample_count": self.x_sample_count,
            "plateau_tol": self.plateau_tol,
            "max_vertices": self.max_vertices,
            "seed": self.seed,
        }


def estimate_unstable_entropy(map_, x_samples, delta, schedule):
    """Unstable topological entropy: sup over basepoints of plateau estimates.

    x_samples may be an integer count (drawn from the seeded Halton set) or an
    explicit array of basepoints.  The arg-sup basepoint is recorded in the
    metadata.
    """
    if isinstance(x_samples, (int, np.integer)):
        points = halton_points(int(x_samples), map_.dimension, seed=schedule.seed)
    else:
        points = np.atleast_2d(np.asarray(x_samples, dtype=float))
    n_max = max(schedule.n_values)
    eps_min = min(schedule.epsilons)
    best = None
    for x in points:
        probe = unstable_segment(map_, x, delta, spacing=delta / 8.0)
        grown = grow_leaf(map_, probe, n_max - 1, schedule.eps_geom,
                          max_vertices=schedule.max_vertices)
        stretch = max(grown.arclength / (2.0 * delta), 1.0)
        spacing = min(eps_min / 4.0, eps_min / (4.0 * stretch))
        _, rows = _leaf_arclength_rows(map_, x, delta, n_max, schedule.eps_geom,
                                       schedule.max_vertices, spacing)
        rows = np.ascontiguousarray(rows)
        slopes = []
        curves = []
        for eps in schedule.epsilons:
            counts = [greedy_leaf_count(rows, float(eps), int(n))
                      for n in schedule.n_values]
            curve = fit_growth_curve(schedule.n_values, np.log(counts),
                                     fit_window=schedule.window())
            curves.append((float(eps), curve))
            slopes.append((float(eps), curve.slope))
        value, converged = _plateau_value(slopes, schedule.plateau_tol)
        spread = max(s for _, s in slopes) - min(s for _, s in slopes)
        if best is None or value > best[0]:
            best = (value, converged, curves, spread, x)
    value, converged, curves, spread, arg_x = best
    return EntropyEstimate(
        value=float(max(value, 0.0)),
        curves=tuple(curves),
        plateau_spread=float(spread),
        converged=converged,
        metadata={"argmax_point": [float(v) for v in arg_x],
                  "delta": delta,
                  "schedule": schedule.to_dict()},
    )


# --- Ruelle bound ----------------------------------------------------------------


def ruelle_upper_bound(map_, n_power=20, sample_count=256, seed=0):
    """Ruelle-inequality upper bound for h_top through the base splitting proxy.

    dim E^c * (1/N) max_x log||Df^N restricted to the center frame|| plus
    max_x log|det(Df restricted to the unstable frame)|, maxima over a
    deterministic sample set.  Exact for toral automorphisms.
    """
    if n_power < 1:
        raise ValueError("n_power must be >= 1")
    base = map_.base if hasattr(map_, "base") else map_
    split = base.splitting()
    is_linear = isinstance(map_, IntegerAutomorphism)
    pts = (wrap(np.zeros((1, map_.dimension))) if is_linear
           else halton_points(sample_count, map_.dimension, seed=seed))

    center_term = 0.0
    if split.dim_center > 0:
        frame_c = split.basis_c
        pinv_c = np.linalg.pinv(frame_c) @ split.projection_c
        cocycle = np.broadcast_to(np.eye(map_.dimension),
                                  (pts.shape[0], map_.dimension, map_.dimension)).copy()
        cur = pts.copy()
        for _ in range(n_power):
            jac = np.asarray(map_.jacobian(cur), dtype=float)
            cocycle = np.einsum("nij,njk->nik", jac, cocycle)
            cur = map_.apply(cur)
        block = np.einsum("ij,njk,kl->nil", pinv_c, cocycle, frame_c)
        norms = np.linalg.norm(block, ord=2, axis=(-2, -1))
        center_term = split.dim_center * float(np.log(norms.max())) / n_power

    unstable_term = 0.0
    if split.dim_unstable > 0:
        frame_u = split.basis_u
        pinv_u = np.linalg.pinv(frame_u) @ split.projection_u
        jac = np.asarray(map_.jacobian(pts), dtype=float)
        block = np.einsum("ij,njk,kl->nil", pinv_u, jac, frame_u)
        dets = np.abs(np.linalg.det(block))
        unstable_term = float(np.log(dets.max()))

    return center_term + unstable_term
