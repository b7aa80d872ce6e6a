"""Trilateral filter: bilateral weights switched toward impulse weights by ROAD."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from numba import njit, prange

from ._parallel import DENOM_EPS, weighted_median
from .image import GrayImage, ImageLike, _check_odd, as_array, reflect
from .road import ROAD_3x3, RoadConfig, road


@dataclass(frozen=True)
class TrifParams:
    D: int = 5
    sigma_i: float = 40.0
    sigma_j: float = 50.0
    sigma_s: float = 0.5
    sigma_r: float = 60.0
    road_cfg: RoadConfig = ROAD_3x3
    iterations: int = 1

    def __post_init__(self) -> None:
        _check_odd(self.D, "D")
        for name in ("sigma_i", "sigma_j", "sigma_s", "sigma_r"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")


def _inv2s2(sigma: float) -> float:
    return 0.0 if math.isinf(sigma) else 1.0 / (2.0 * sigma * sigma)


@njit(parallel=True, cache=True)
def _trif_kernel(pv, pr, h, w, rs, ks, kr, ki, kj):
    D = 2 * rs + 1
    out = np.empty((h, w))
    for y in prange(h):
        vals = np.empty(D * D)
        wi = np.empty(D * D)
        for x in range(w):
            cy = y + rs
            cx = x + rs
            vc = pv[cy, cx]
            rc = pr[cy, cx]
            num = 0.0
            den = 0.0
            n = 0
            for sy in range(-rs, rs + 1):
                for sx in range(-rs, rs + 1):
                    vj = pv[cy + sy, cx + sx]
                    rj = pr[cy + sy, cx + sx]
                    cheb = max(abs(sy), abs(sx))
                    mean_road = 0.5 * (rc + rj)
                    jf = math.exp(-mean_road * mean_road * kj)
                    log_wi = -rj * rj * ki
                    dv = vc - vj
                    log_w = -cheb * cheb * ks + jf * (-dv * dv * kr) + (1.0 - jf) * log_wi
                    wt = math.exp(log_w)
                    num += wt * vj
                    den += wt
                    vals[n] = vj
                    wi[n] = math.exp(log_wi)
                    n += 1
            if den < DENOM_EPS:
                out[y, x] = weighted_median(vals, wi)
            else:
                out[y, x] = num / den
    return out


def trif_denoise(img: ImageLike, params: TrifParams) -> GrayImage:
    """One trilateral pass; ROAD is computed from ``img`` itself."""
    arr = as_array(img)
    h, w = arr.shape
    rs = params.D // 2
    roadmap = road(arr, params.road_cfg)
    out = _trif_kernel(
        reflect(arr, rs), reflect(roadmap, rs), h, w, rs,
        _inv2s2(params.sigma_s), _inv2s2(params.sigma_r),
        _inv2s2(params.sigma_i), _inv2s2(params.sigma_j),
    )
    return GrayImage(out)


def trif_iterate(
    img: ImageLike, params: TrifParams, sigma_s_schedule: Optional[Sequence[float]] = None
) -> GrayImage:
    """Repeated passes, each fed the previous output.

    With ``sigma_s_schedule`` the pass count is the schedule length and pass
    k uses ``sigma_s_schedule[k]``; otherwise ``params.iterations`` passes.
    """
    if sigma_s_schedule is not None:
        schedule = [float(s) for s in sigma_s_schedule]
        if not schedule:
            raise ValueError("empty sigma_S schedule")
    else:
        schedule = [params.sigma_s] * params.iterations
    out = GrayImage(as_array(img))
    for s in schedule:
        out = trif_denoise(out, replace(params, sigma_s=s, iterations=1))
    return out


def baseline_protocol(sigma: float, p: float) -> tuple[TrifParams, list[float]]:
    """Baseline iteration protocol for a noise level.

    Impulse noise: 1 pass at p ≤ 0.2, 2 passes at p ≤ 0.4, otherwise 4.
    Mixed noise: two passes with σ_S pairs (0.3, 1), (0.3, 15), (15, 15)
    for σ near 10, 20, 30. σ_R is a plain parameter here, set to 3σ for
    mixed noise and 30 for impulse-only noise.
    """
    if sigma <= 0:
        passes = 1 if p <= 0.2 + 1e-9 else 2 if p <= 0.4 + 1e-9 else 4
        params = TrifParams(sigma_r=30.0, iterations=passes)
        return params, [params.sigma_s] * passes
    if sigma < 15:
        schedule = [0.3, 1.0]
    elif sigma < 25:
        schedule = [0.3, 15.0]
    else:
        schedule = [15.0, 15.0]
    return TrifParams(sigma_r=3.0 * sigma, iterations=2), schedule

