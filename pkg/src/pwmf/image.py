"""Grayscale image container, mirror boundaries, patches and patch distances.

All filters in this package read pixels outside the image through the same
mirror rule: reflection about the edge pixel, without repeating it
(``... 2 1 | 0 1 2 ... n-1 | n-2 ...``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

Coord = tuple[int, int]


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Real-valued intensity grid, row-major, nominal range [0, 255].

    Values are never clamped here; quantization happens only in
    :func:`write_pgm`.
    """

    pixels: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.pixels, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError(f"expected a non-empty 2-D array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image contains non-finite pixel values")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def __array__(self, dtype=None, copy=None):
        return self.pixels if dtype is None else self.pixels.astype(dtype)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.pixels, other.pixels))

    def crop(self, border: int) -> "GrayImage":
        if border == 0:
            return self
        if border < 0 or 2 * border >= min(self.shape):
            raise ValueError(f"crop border {border} invalid for image of shape {self.shape}")
        return GrayImage(self.pixels[border:-border, border:-border])


ImageLike = Union[GrayImage, np.ndarray]


def as_array(img: ImageLike) -> np.ndarray:
    """Return the float64 pixel array of ``img`` (no copy for GrayImage)."""
    if isinstance(img, GrayImage):
        return img.pixels
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {arr.shape}")
    return arr


def mirror_index(k: int, n: int) -> int:
    """Map any integer index onto ``[0, n)`` by repeated edge reflection."""
    if n == 1:
        return 0
    period = 2 * (n - 1)
    k %= period
    return k if k < n else period - k


def reflect(arr: np.ndarray, r: int) -> np.ndarray:
    """Mirror-pad a raw array by ``r`` on all sides, any ``r`` allowed."""
    if r == 0:
        return np.ascontiguousarray(arr, dtype=np.float64)
    return np.pad(np.asarray(arr, dtype=np.float64), r, mode="reflect")


def mirror_pad(img: ImageLike, r: int) -> GrayImage:
    """Pad ``img`` by ``r`` pixels on every side with mirror reflections.

    Raises ValueError("pad radius too large") when ``r`` reaches an image
    dimension larger than one pixel; single-pixel axes just replicate.
    """
    arr = as_array(img)
    if r < 0:
        raise ValueError("pad radius must be nonnegative")
    if any(n > 1 and r >= n for n in arr.shape):
        raise ValueError("pad radius too large")
    return GrayImage(reflect(arr, r))


def _check_odd(d: int, name: str = "d") -> None:
    if d < 1 or d % 2 == 0:
        raise ValueError(f"{name} must be a positive odd integer, got {d}")


def patch(img: ImageLike, i: Coord, d: int) -> np.ndarray:
    """The d x d window around ``i`` as a length-d² vector, row-major."""
    _check_odd(d)
    arr = as_array(img)
    h, w = arr.shape
    r = d // 2
    rows = [mirror_index(i[0] + dy, h) for dy in range(-r, r + 1)]
    cols = [mirror_index(i[1] + dx, w) for dx in range(-r, r + 1)]
    return arr[np.ix_(rows, cols)].ravel()


@dataclass(frozen=True, eq=False)
class PatchKernel:
    """Offset weights a(i, k) over a d x d patch.

    ``weights`` is a d x d array indexed by offset; ``exclude_center``
    zeroes the center offset (the punctured window N_i⁰).
    """

    d: int
    weights: np.ndarray = field(repr=False)
    exclude_center: bool = False

    def __post_init__(self) -> None:
        _check_odd(self.d)
        if self.d < 3:
            raise ValueError("patch diameter must be at least 3")
        w = np.array(self.weights, dtype=np.float64)
        if w.shape != (self.d, self.d):
            raise ValueError(f"weights must have shape ({self.d}, {self.d})")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("kernel weights must be finite and nonnegative")
        if self.exclude_center:
            w[self.d // 2, self.d // 2] = 0.0
        if not np.any(w > 0):
            raise ValueError("kernel needs at least one positive weight")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, d: int, exclude_center: bool = False) -> "PatchKernel":
        return cls(d, np.ones((d, d)), exclude_center)

    @classmethod
    def gaussian(cls, d: int, sigma: float, exclude_center: bool = False) -> "PatchKernel":
        """Weights exp(-|k|²/(2σ²)) with |k| the Chebyshev offset length."""
        return cls(d, chebyshev_gaussian(d, sigma), exclude_center)


def chebyshev_gaussian(d: int, sigma: float) -> np.ndarray:
    """d x d array of exp(-max(|dy|,|dx|)²/(2σ²)); σ = inf gives all ones."""
    r = d // 2
    off = np.arange(-r, r + 1)
    cheb = np.maximum(np.abs(off)[:, None], np.abs(off)[None, :]).astype(np.float64)
    if math.isinf(sigma):
        return np.ones((d, d))
    return np.exp(-(cheb**2) / (2.0 * sigma * sigma))


def patch_distance2(img: ImageLike, i: Coord, j: Coord, kernel: PatchKernel) -> float:
    """Normalized weighted squared distance between the patches at i and j."""
    a = kernel.weights.ravel()
    diff = patch(img, i, kernel.d) - patch(img, j, kernel.d)
    return float(np.dot(a, diff * diff) / a.sum())


# --- file I/O -------------------------------------------------------------


class PgmError(ValueError):
    pass


def _tokens(data: bytes, count: int) -> tuple[list[int], int]:
    out: list[int] = []
    pos = 2
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise PgmError("truncated PGM header")
        out.append(int(data[start:pos]))
    # exactly one whitespace byte separates the header from the raster
    return out, pos + 1


def read_pgm(path: str | Path) -> GrayImage:
    """Read a binary (P5) or plain (P2) PGM file."""
    data = Path(path).read_bytes()
    magic = data[:2]
    if magic not in (b"P5", b"P2"):
        raise PgmError(f"{path}: not a PGM file")
    try:
        (width, height, maxval), offset = _tokens(data, 3)
    except ValueError as exc:
        raise PgmError(f"{path}: bad header") from exc
    if width <= 0 or height <= 0 or not 0 < maxval < 65536:
        raise PgmError(f"{path}: bad header values")
    if magic == b"P2":
        values = np.array(data[offset - 1 :].split(), dtype=np.float64)
        if values.size < width * height:
            raise PgmError(f"{path}: truncated raster")
        pix = values[: width * height]
    else:
        dtype = np.dtype(np.uint8) if maxval < 256 else np.dtype(">u2")
        count = width * height
        if len(data) - offset < count * dtype.itemsize:
            raise PgmError(f"{path}: truncated raster")
        raster = np.frombuffer(data, dtype=dtype, count=count, offset=offset)
        pix = raster.astype(np.float64)
    if maxval != 255:
        pix = pix * (255.0 / maxval)
    return GrayImage(pix.reshape(height, width))


def quantize(img: ImageLike) -> np.ndarray:
    """Clamp to [0, 255] and round half away from zero to uint8."""
    arr = np.clip(as_array(img), 0.0, 255.0)
    return np.floor(arr + 0.5).astype(np.uint8)


def write_pgm(path: str | Path, img: ImageLike) -> None:
    q = quantize(img)
    h, w = q.shape
    Path(path).write_bytes(b"P5\n%d %d\n255\n" % (w, h) + q.tobytes())


def read_image(path: str | Path) -> GrayImage:
    """Read PGM, or any Pillow-readable format converted to 8-bit gray."""
    p = Path(path)
    if p.suffix.lower() in (".pgm", ".pnm"):
        return read_pgm(p)
    from PIL import Image

    with Image.open(p) as im:
        return GrayImage(np.asarray(im.convert("L"), dtype=np.float64))


def write_image(path: str | Path, img: ImageLike) -> None:
    p = Path(path)
    if p.suffix.lower() in (".pgm", ".pnm"):
        write_pgm(p, img)
        return
    from PIL import Image

    Image.fromarray(quantize(img), mode="L").save(p)


def rescaled(values: np.ndarray) -> GrayImage:
    """Linearly map a field onto [0, 255] for visual inspection."""
    v = np.asarray(values, dtype=np.float64)
    lo, hi = float(v.min()), float(v.max())
    if hi - lo <= 0:
        return GrayImage(np.zeros_like(v))
    return GrayImage((v - lo) * (255.0 / (hi - lo)))
