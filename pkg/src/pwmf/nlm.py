"""Non-local means, including the center-excluded (v⁰) estimator variant."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from numba import njit, prange

from .image import GrayImage, ImageLike, PatchKernel, _check_odd, as_array, reflect

SelfWeight = Literal["computed", "max_of_others"]


@dataclass(frozen=True)
class NlmParams:
    """NL-means configuration.

    ``similarity_threshold`` (T) keeps only candidates whose plain,
    unnormalized squared patch distance is at most T².
    """

    d: int = 7
    D: int = 21
    sigma_r: float = 10.0
    kernel: Optional[PatchKernel] = None
    exclude_center_norm: bool = False
    self_weight_policy: SelfWeight = "max_of_others"
    similarity_threshold: Optional[float] = None
    _weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        _check_odd(self.d, "d")
        _check_odd(self.D, "D")
        if not self.sigma_r > 0:
            raise ValueError("sigma_r must be positive")
        if self.self_weight_policy not in ("computed", "max_of_others"):
            raise ValueError(f"unknown self weight policy {self.self_weight_policy!r}")
        if self.similarity_threshold is not None and self.similarity_threshold < 0:
            raise ValueError("similarity threshold must be nonnegative")
        kernel = self.kernel if self.kernel is not None else PatchKernel.uniform(self.d)
        if kernel.d != self.d:
            raise ValueError("kernel size does not match d")
        w = np.array(kernel.weights)
        if self.exclude_center_norm:
            w[self.d // 2, self.d // 2] = 0.0
            if not np.any(w > 0):
                raise ValueError("kernel has no weight outside the center")
        object.__setattr__(self, "kernel", kernel)
        object.__setattr__(self, "_weights", w)

    @classmethod
    def v0(cls, d: int, D: int, sigma_r: float, **kw) -> "NlmParams":
        """The center-excluded estimator: N_i⁰ norm, computed self weight."""
        kw.setdefault("exclude_center_norm", True)
        kw.setdefault("self_weight_policy", "computed")
        return cls(d=d, D=D, sigma_r=sigma_r, **kw)

    @property
    def norm_weights(self) -> np.ndarray:
        """Effective d x d offset weights used in the patch norm."""
        return self._weights


@njit(parallel=True, cache=True)
def _nlm_kernel(padded, h, w, rs, rp, a, inv2s2, use_thresh, t2, self_max):
    pad = rs + rp
    d = 2 * rp + 1
    D = 2 * rs + 1
    asum = a.sum()
    out = np.empty((h, w))
    for y in prange(h):
        wts = np.empty(D * D)
        vals = np.empty(D * D)
        keep = np.empty(D * D, dtype=np.bool_)
        for x in range(w):
            cy = y + pad
            cx = x + pad
            n = 0
            n_pass = 0
            wmax = 0.0
            for sy in range(-rs, rs + 1):
                for sx in range(-rs, rs + 1):
                    jy = cy + sy
                    jx = cx + sx
                    num = 0.0
                    plain = 0.0
                    for ky in range(d):
                        for kx in range(d):
                            diff = (padded[cy - rp + ky, cx - rp + kx]
                                    - padded[jy - rp + ky, jx - rp + kx])
                            dd = diff * diff
                            num += a[ky, kx] * dd
                            plain += dd
                    wt = math.exp(-(num / asum) * inv2s2)
                    ok = (not use_thresh) or plain <= t2
                    is_self = sy == 0 and sx == 0
                    if ok and not is_self:
                        n_pass += 1
                        if wt > wmax:
                            wmax = wt
                    wts[n] = wt
                    vals[n] = padded[jy, jx]
                    keep[n] = ok or is_self
                    n += 1
            if use_thresh and n_pass == 0:
                # nothing similar besides i: fall back to the full window
                wmax = 0.0
                for k in range(n):
                    keep[k] = True
                for k in range(n):
                    if k != n // 2 and wts[k] > wmax:
                        wmax = wts[k]
                n_pass = n - 1
            if self_max:
                wts[n // 2] = wmax if n_pass > 0 else 1.0
            num_v = 0.0
            den = 0.0
            for k in range(n):
                if keep[k]:
                    num_v += wts[k] * vals[k]
                    den += wts[k]
            out[y, x] = num_v / den
    return out


def nlm_denoise(img: ImageLike, params: NlmParams) -> GrayImage:
    arr = as_array(img)
    h, w = arr.shape
    rp, rs = params.d // 2, params.D // 2
    inv2s2 = 0.0 if math.isinf(params.sigma_r) else 1.0 / (2.0 * params.sigma_r**2)
    t = params.similarity_threshold
    out = _nlm_kernel(
        reflect(arr, rs + rp), h, w, rs, rp, params.norm_weights, inv2s2,
        t is not None, 0.0 if t is None else float(t) ** 2,
        params.self_weight_policy == "max_of_others",
    )
    return GrayImage(out)
