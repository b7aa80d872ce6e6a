"""Thread control and small numba helpers shared by the filters."""

from __future__ import annotations

import numba
import numpy as np
from numba import njit

DENOM_EPS = 1e-12


def set_threads(n: int | None) -> int:
    """Bound numba parallelism to ``n`` threads; returns the count in effect.

    Results never depend on this value: every output pixel is computed by
    a fixed sequential loop.
    """
    if n is None:
        return numba.get_num_threads()
    if n < 1:
        raise ValueError("thread count must be positive")
    n = min(n, numba.config.NUMBA_NUM_THREADS)
    numba.set_num_threads(n)
    return n


@njit(cache=True)
def weighted_median(values, weights):
    """Lower weighted median; plain median when all weights vanish."""
    order = np.argsort(values, kind="mergesort")
    total = 0.0
    for k in range(weights.size):
        total += weights[k]
    if not total > 0.0:
        return np.median(values)
    acc = 0.0
    for k in order:
        acc += weights[k]
        if acc >= 0.5 * total:
            return values[k]
    return values[order[-1]]
