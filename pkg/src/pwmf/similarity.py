"""Degree of similarity (DS) of a noisy image and its chi-square threshold."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit, prange
from scipy.special import gammainc, gammaincc

from .image import ImageLike, _check_odd, as_array, reflect, rescaled, write_pgm


def chi2_isf(alpha: float, dof: int, tol: float = 1e-13) -> float:
    """Upper-α quantile of χ²(dof) by bisection on the regularized incomplete
    gamma. For α > 1/2 the lower tail P(dof/2, x/2) = 1 - α is solved
    instead, which keeps full precision as α approaches 1."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    k = 0.5 * dof
    if alpha <= 0.5:
        def above(x: float) -> bool:
            return float(gammaincc(k, 0.5 * x)) > alpha
    else:
        lower = 1.0 - alpha

        def above(x: float) -> bool:
            return float(gammainc(k, 0.5 * x)) < lower

    lo, hi = 0.0, max(1.0, float(dof))
    while above(hi):
        lo, hi = hi, 2.0 * hi
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if above(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def t_alpha(alpha: float, sigma: float, d: int) -> float:
    """Patch-distance threshold T with P(‖v(N_i) - v(N_j)‖ > T) = α for two
    independent patches of the same law under Gaussian noise σ."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    _check_odd(d)
    return float(np.sqrt(2.0 * sigma * sigma * chi2_isf(alpha, d * d)))


@dataclass(frozen=True, eq=False)
class DsReport:
    alpha: float
    sigma: float
    d: int
    D: int
    t_alpha: float
    per_pixel: np.ndarray = field(repr=False)

    @property
    def global_ds(self) -> float:
        return float(self.per_pixel.mean())

    def summary(self) -> str:
        return (
            f"alpha={self.alpha:g} sigma={self.sigma:g} d={self.d} D={self.D} "
            f"t_alpha={self.t_alpha:.4f} DS={self.global_ds:.4f}"
        )

    def write_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["row", "col", "ds"])
            for (y, x), v in np.ndenumerate(self.per_pixel):
                out.writerow([y, x, repr(float(v))])

    def write_pgm(self, path: str | Path) -> None:
        write_pgm(path, rescaled(self.per_pixel))


@njit(parallel=True, cache=True)
def _ds_kernel(padded, h, w, rs, rp, t2):
    pad = rs + rp
    d = 2 * rp + 1
    D = 2 * rs + 1
    out = np.empty((h, w))
    for y in prange(h):
        for x in range(w):
            cy = y + pad
            cx = x + pad
            count = 0
            for sy in range(-rs, rs + 1):
                for sx in range(-rs, rs + 1):
                    s = 0.0
                    for ky in range(d):
                        for kx in range(d):
                            diff = (padded[cy - rp + ky, cx - rp + kx]
                                    - padded[cy + sy - rp + ky, cx + sx - rp + kx])
                            s += diff * diff
                    if s <= t2:
                        count += 1
            out[y, x] = count / (D * D)
    return out


def ds_map(img: ImageLike, sigma: float, alpha: float = 0.1, d: int = 9, D: int = 7) -> DsReport:
    """Fraction of search-window patches within T_α of each pixel's patch."""
    _check_odd(D, "D")
    arr = as_array(img)
    h, w = arr.shape
    t = t_alpha(alpha, sigma, d)
    rp, rs = d // 2, D // 2
    per_pixel = _ds_kernel(reflect(arr, rs + rp), h, w, rs, rp, t * t)
    return DsReport(alpha, sigma, d, D, t, per_pixel)
