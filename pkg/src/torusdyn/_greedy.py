"""Jitted kernels for greedy separated-set construction.

Both kernels scan candidates in their given order and keep a point iff it is
separated from every previously kept point, so the result is exactly the
fixed-order greedy independent set; runs are bit-reproducible.
"""

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def greedy_bowen_count(orbits, eps, n_use):
    """Greedy (n, eps)-separated subset size on precomputed orbits.

    orbits: (N, n_max, d) canonical coordinates, row i is the orbit of
    candidate i.  A survivor check exits early on the first coordinate pair
    farther than eps; a kill costs the full n_use * d scan.
    """
    n_cand = orbits.shape[0]
    dim = orbits.shape[2]
    alive = np.ones(n_cand, numba.boolean)
    kept = np.zeros(n_cand, numba.boolean)
    count = 0
    for i in range(n_cand):
        if not alive[i]:
            continue
        kept[i] = True
        count += 1
        for k in range(i + 1, n_cand):
            if not alive[k]:
                continue
            separated = False
            for j in range(n_use):
                for c in range(dim):
                    delta = abs(orbits[i, j, c] - orbits[k, j, c])
                    if delta > 0.5:
                        delta = 1.0 - delta
                    if delta > eps:
                        separated = True
                        break
                if separated:
                    break
            if not separated:
                alive[k] = False
    return count, kept


@numba.njit(cache=True, nogil=True)
def greedy_leaf_count(positions, eps, n_use):
    """Greedy packing of leaf samples under the iterated leaf metric.

    positions: (n_max, N) arclength of each sample on the step-j polyline,
    each row non-decreasing in the sample index.  The metric between samples
    a < b is max_j (positions[j, b] - positions[j, a]), so the left-to-right
    greedy walk accepts the first sample strictly more than eps away in some
    row and is the fixed-order greedy packing.
    """
    n_samples = positions.shape[1]
    count = 1
    anchor = 0
    while True:
        nxt = n_samples
        for j in range(n_use):
            bound = positions[j, anchor] + eps
            lo, hi = anchor + 1, n_samples
            while lo < hi:
                mid = (lo + hi) // 2
                if positions[j, mid] > bound:
                    hi = mid
                else:
                    lo = mid + 1
            if lo < nxt:
                nxt = lo
        if nxt >= n_samples:
            return count
        anchor = nxt
        count += 1
