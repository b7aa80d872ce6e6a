"""Patch-based weighted means filter (PWMF) for impulse and mixed noise.

Each neighbor j of pixel i is weighted by a spatial factor, its own impulse
factor w_I(j), and a patch-similarity factor. Patch similarity uses a masked
norm: every offset's squared difference is weighted by w_I at both ends, so
impulse pixels drop out of the comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from numba import njit, prange

from ._parallel import DENOM_EPS, weighted_median
from .image import (
    Coord,
    GrayImage,
    ImageLike,
    _check_odd,
    as_array,
    chebyshev_gaussian,
    mirror_index,
    reflect,
)
from .road import ROAD_3x3, ROAD_5x5, RoadConfig, impulse_factor, road

INF = math.inf


class NoiseKind(str, Enum):
    IMPULSE = "impulse"
    MIXED = "mixed"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class PwmfParams:
    """PWMF configuration. ``math.inf`` for sigma_s / sigma_sm drops that factor."""

    d: int = 9
    D: int = 7
    sigma_i: float = 50.0
    sigma_m: float = 7.0
    sigma_s: float = INF
    sigma_sm: float = INF
    road_cfg: RoadConfig = ROAD_3x3

    def __post_init__(self) -> None:
        _check_odd(self.d, "d")
        _check_odd(self.D, "D")
        if self.d < 3:
            raise ValueError("patch diameter must be at least 3")
        for name in ("sigma_i", "sigma_m", "sigma_s", "sigma_sm"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def explain(self) -> str:
        def fmt(v: float) -> str:
            return "inf (factor omitted)" if math.isinf(v) else f"{v:.6g}"

        side = 2 * self.road_cfg.radius + 1
        return "\n".join([
            f"patch d        = {self.d}",
            f"search D       = {self.D}",
            f"sigma_I        = {fmt(self.sigma_i)}",
            f"sigma_M        = {fmt(self.sigma_m)}",
            f"sigma_S        = {fmt(self.sigma_s)}",
            f"sigma_SM       = {fmt(self.sigma_sm)}",
            f"ROAD window    = {side}x{side}, m = {self.road_cfg.m}",
        ])


def _inv2s2(sigma: float) -> float:
    return 0.0 if math.isinf(sigma) else 1.0 / (2.0 * sigma * sigma)


def _norm_weights(params: PwmfParams) -> np.ndarray:
    """w_{S,M} over patch offsets, center removed (sum over N_i⁰)."""
    sm = chebyshev_gaussian(params.d, params.sigma_sm)
    sm[params.d // 2, params.d // 2] = 0.0
    return sm


def pwmf_norm2(
    img: ImageLike, roadmap: np.ndarray, i: Coord, j: Coord, params: PwmfParams
) -> float:
    """Masked squared patch distance ‖v(N_i) - v(N_j)‖_M².

    Returns ``inf`` when the mask leaves no weight (every compared pair
    involves an impulse-like pixel).
    """
    arr = as_array(img)
    h, w = arr.shape
    r = params.d // 2
    wi = impulse_factor(np.asarray(roadmap, dtype=np.float64), params.sigma_i)
    rows_i = [mirror_index(i[0] + o, h) for o in range(-r, r + 1)]
    cols_i = [mirror_index(i[1] + o, w) for o in range(-r, r + 1)]
    rows_j = [mirror_index(j[0] + o, h) for o in range(-r, r + 1)]
    cols_j = [mirror_index(j[1] + o, w) for o in range(-r, r + 1)]
    vi, vj = arr[np.ix_(rows_i, cols_i)], arr[np.ix_(rows_j, cols_j)]
    mask = _norm_weights(params) * wi[np.ix_(rows_i, cols_i)] * wi[np.ix_(rows_j, cols_j)]
    den = mask.sum()
    if den < DENOM_EPS:
        return INF
    return float((mask * (vi - vj) ** 2).sum() / den)


@njit(parallel=True, cache=True)
def _pwmf_kernel(pv, pwi, h, w, rs, rp, sm, ks, km):
    pad = rs + rp
    d = 2 * rp + 1
    D = 2 * rs + 1
    out = np.empty((h, w))
    for y in prange(h):
        vals = np.empty(D * D)
        wis = np.empty(D * D)
        for x in range(w):
            cy = y + pad
            cx = x + pad
            num_v = 0.0
            den_v = 0.0
            n = 0
            for sy in range(-rs, rs + 1):
                for sx in range(-rs, rs + 1):
                    jy = cy + sy
                    jx = cx + sx
                    wij = pwi[jy, jx]
                    vals[n] = pv[jy, jx]
                    wis[n] = wij
                    n += 1
                    if sy == 0 and sx == 0:
                        # identical patches: w_M(i, i) = 1
                        num_v += wij * pv[jy, jx]
                        den_v += wij
                        continue
                    if wij == 0.0:
                        continue
                    num = 0.0
                    den = 0.0
                    for ky in range(d):
                        for kx in range(d):
                            a = sm[ky, kx]
                            if a == 0.0:
                                continue
                            py = cy - rp + ky
                            px = cx - rp + kx
                            qy = jy - rp + ky
                            qx = jx - rp + kx
                            f = a * pwi[py, px] * pwi[qy, qx]
                            diff = pv[py, px] - pv[qy, qx]
                            num += f * diff * diff
                            den += f
                    if den < DENOM_EPS:
                        continue
                    cheb = max(abs(sy), abs(sx))
                    wt = math.exp(-cheb * cheb * ks) * wij * math.exp(-(num / den) * km)
                    num_v += wt * pv[jy, jx]
                    den_v += wt
            if den_v < DENOM_EPS:
                out[y, x] = weighted_median(vals, wis)
            else:
                out[y, x] = num_v / den_v
    return out


def pwmf_denoise(
    img: ImageLike, params: PwmfParams, roadmap: Optional[np.ndarray] = None
) -> GrayImage:
    """Restore ``img``.

    ROAD is computed once on the input unless a precomputed ``roadmap``
    (same shape) is supplied.
    """
    arr = as_array(img)
    h, w = arr.shape
    rp, rs = params.d // 2, params.D // 2
    if roadmap is None:
        roadmap = road(arr, params.road_cfg)
    elif np.shape(roadmap) != arr.shape:
        raise ValueError("roadmap shape does not match the image")
    wi = impulse_factor(np.asarray(roadmap, dtype=np.float64), params.sigma_i)
    pad = rs + rp
    out = _pwmf_kernel(
        reflect(arr, pad), reflect(wi, pad), h, w, rs, rp,
        _norm_weights(params), _inv2s2(params.sigma_s), _inv2s2(params.sigma_m),
    )
    return GrayImage(out)


# --- automatic parameters -------------------------------------------------

_D_SIGMAS = (0.0, 10.0, 20.0, 30.0)
_D_VALUES = (7.0, 7.0, 11.0, 15.0)
GAUSSIAN_SIGMA_I = 1e12


def nearest_odd(x: float) -> int:
    """Nearest odd integer, ties going up."""
    return 2 * math.floor((x - 1.0) / 2.0 + 0.5) + 1


def search_diameter(sigma: float) -> int:
    """Search window D for noise level σ, piecewise linear through the table
    (σ: 0, 10, 20, 30 → D: 7, 7, 11, 15), extended linearly past σ = 30."""
    if sigma >= _D_SIGMAS[-1]:
        slope = (_D_VALUES[-1] - _D_VALUES[-2]) / (_D_SIGMAS[-1] - _D_SIGMAS[-2])
        return nearest_odd(_D_VALUES[-1] + slope * (sigma - _D_SIGMAS[-1]))
    return nearest_odd(float(np.interp(sigma, _D_SIGMAS, _D_VALUES)))


def _road_for(p: float) -> RoadConfig:
    return ROAD_5x5 if p >= 0.35 else ROAD_3x3


def _impulse_sigma_i(p: float) -> float:
    if p <= 0.3:
        return 50.0
    if p >= 0.4:
        return 160.0
    return 50.0 + (p - 0.3) / 0.1 * 110.0


def auto_params(sigma: float, p: float, kind: NoiseKind | str) -> PwmfParams:
    """Parameter schedule for a known noise level.

    ``mixed`` at p ≥ 0.4 extrapolates beyond the calibrated range (p ≤ 0.3).
    """
    kind = NoiseKind(kind)
    if sigma < 0 or not 0 <= p < 1:
        raise ValueError("need sigma >= 0 and 0 <= p < 1")
    if kind is NoiseKind.IMPULSE and sigma != 0:
        raise ValueError("impulse noise requires sigma = 0")
    if kind is NoiseKind.GAUSSIAN and p != 0:
        raise ValueError("gaussian noise requires p = 0")
    D = search_diameter(sigma)
    if kind is NoiseKind.IMPULSE:
        return PwmfParams(
            d=9, D=D, sigma_i=_impulse_sigma_i(p), sigma_m=3.0 + 20.0 * p,
            sigma_s=0.6 + p, sigma_sm=INF, road_cfg=_road_for(p),
        )
    sigma_m = 3.0 + 0.4 * sigma + 20.0 * p
    if kind is NoiseKind.MIXED:
        return PwmfParams(
            d=9, D=D, sigma_i=50.0 + 5.0 * sigma / 3.0, sigma_m=sigma_m,
            sigma_s=INF, sigma_sm=2.0, road_cfg=_road_for(p),
        )
    return PwmfParams(
        d=9, D=D, sigma_i=GAUSSIAN_SIGMA_I, sigma_m=sigma_m,
        sigma_s=INF, sigma_sm=2.0, road_cfg=ROAD_3x3,
    )
