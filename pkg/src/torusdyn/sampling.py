"""Deterministic low-discrepancy point sets.

Sample-hungry operations (C1 distance, center growth, Ruelle bound, UEG
certificates) all draw their probe points from a Halton sequence whose start
index is derived from the caller's seed, so identical seeds give identical
points and distinct seeds give disjoint stretches of the sequence.
"""

import numpy as np

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _radical_inverse(indices, base):
    out = np.zeros(indices.shape, dtype=float)
    denom = 1.0
    idx = indices.copy()
    while idx.max() > 0:
        denom *= base
        out += (idx % base) / denom
        idx //= base
    return out


def halton_points(count, dim, seed=0):
    """`count` Halton points in [0,1)^dim, offset deterministically by seed."""
    if dim > len(_PRIMES):
        raise ValueError(f"halton_points supports dim <= {len(_PRIMES)}")
    if count < 1:
        raise ValueError("count must be >= 1")
    start = 1 + (int(seed) % (1 << 20)) * int(count)
    indices = np.arange(start, start + count, dtype=np.int64)
    cols = [_radical_inverse(indices, _PRIMES[k]) for k in range(dim)]
    return np.stack(cols, axis=1)


def derive_seed(seed, index):
    """Per-ladder-point seed: base seed XOR point index."""
    return int(seed) ^ int(index)
