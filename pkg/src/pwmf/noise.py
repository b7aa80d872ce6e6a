"""Seed-reproducible Gaussian, impulse and mixed noise.

Every random draw is a pure function of ``(seed, stream, pixel index)``
through a splitmix64 hash, so results do not depend on evaluation order or
on how the work is split across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .image import GrayImage, ImageLike, as_array

_MASK = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)

# stream tags
_GAUSS = 0x6A09E667F3BCC908
_SELECT = 0xBB67AE8584CAA73B
_VALUE = 0x3C6EF372FE94F82B
_DERIVE_G = 0xA54FF53A5F1D36F1
_DERIVE_I = 0x510E527FADE682D1


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _mix_int(x: int) -> int:
    with np.errstate(over="ignore"):
        return int(_mix(np.array([x & _MASK], dtype=np.uint64))[0])


def uniform_stream(seed: int, tag: int, n: int) -> np.ndarray:
    """``n`` uniforms in (0, 1); element k depends only on (seed, tag, k)."""
    key = np.uint64(_mix_int((seed & _MASK) ^ tag))
    with np.errstate(over="ignore"):
        counters = np.arange(1, n + 1, dtype=np.uint64)
        bits = _mix(key + counters * _GOLDEN)
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def derive_seeds(seed: int) -> tuple[int, int]:
    """Seeds for the Gaussian and impulse stages of mixed noise."""
    return _mix_int((seed & _MASK) ^ _DERIVE_G), _mix_int((seed & _MASK) ^ _DERIVE_I)


def add_gaussian(img: ImageLike, sigma: float, seed: int) -> GrayImage:
    """v = u + N(0, σ²) per pixel, unclamped."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    u = as_array(img)
    if sigma == 0:
        return GrayImage(u)
    eta = ndtri(uniform_stream(seed, _GAUSS, u.size)).reshape(u.shape)
    return GrayImage(u + sigma * eta)


def impulse_mask(shape: tuple[int, int], p: float, seed: int) -> np.ndarray:
    """Boolean map of the pixels :func:`add_impulse` replaces."""
    n = shape[0] * shape[1]
    return (uniform_stream(seed, _SELECT, n) < p).reshape(shape)


def add_impulse(
    img: ImageLike, p: float, lo: float = 0.0, hi: float = 255.0, seed: int = 0
) -> GrayImage:
    """Replace each pixel by Uniform[lo, hi] with probability p."""
    if not 0 <= p < 1:
        raise ValueError("impulse probability must lie in [0, 1)")
    if not lo < hi:
        raise ValueError("impulse range needs lo < hi")
    u = as_array(img)
    if p == 0:
        return GrayImage(u)
    hit = impulse_mask(u.shape, p, seed)
    values = lo + (hi - lo) * uniform_stream(seed, _VALUE, u.size).reshape(u.shape)
    return GrayImage(np.where(hit, values, u))


def add_mixed(img: ImageLike, sigma: float, p: float, seed: int) -> GrayImage:
    """Gaussian noise first, then impulse noise on [0, 255]."""
    s_gauss, s_imp = derive_seeds(seed)
    return add_impulse(add_gaussian(img, sigma, s_gauss), p, 0.0, 255.0, s_imp)


@dataclass(frozen=True)
class NoiseSpec:
    kind: str = "gaussian"
    sigma: float = 0.0
    p: float = 0.0
    lo: float = 0.0
    hi: float = 255.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("gaussian", "impulse", "mixed"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if not 0 <= self.p < 1:
            raise ValueError("impulse probability must lie in [0, 1)")
        if not self.lo < self.hi:
            raise ValueError("impulse range needs lo < hi")

    def apply(self, img: ImageLike) -> GrayImage:
        if self.kind == "gaussian":
            return add_gaussian(img, self.sigma, self.seed)
        if self.kind == "impulse":
            return add_impulse(img, self.p, self.lo, self.hi, self.seed)
        return add_mixed(img, self.sigma, self.p, self.seed)

    @property
    def effective_sigma(self) -> float:
        return 0.0 if self.kind == "impulse" else self.sigma

    @property
    def effective_p(self) -> float:
        return 0.0 if self.kind == "gaussian" else self.p

    def to_text(self) -> str:
        return (
            f"kind={self.kind} sigma={self.sigma:g} p={self.p:g} "
            f"lo={self.lo:g} hi={self.hi:g} seed={self.seed}"
        )

    @classmethod
    def from_text(cls, text: str) -> "NoiseSpec":
        fields = dict(tok.split("=", 1) for tok in text.split())
        unknown = set(fields) - {"kind", "sigma", "p", "lo", "hi", "seed"}
        if unknown:
            raise ValueError(f"unknown noise fields: {sorted(unknown)}")
        kw: dict = {}
        for name, conv in (("kind", str), ("sigma", float), ("p", float),
                           ("lo", float), ("hi", float), ("seed", int)):
            if name in fields:
                kw[name] = conv(fields[name])
        return cls(**kw)
