"""ROAD impulse statistic and the impulse / joint impulse factors."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit, prange

from .image import ImageLike, as_array, reflect, rescaled, write_pgm


@dataclass(frozen=True)
class RoadConfig:
    """Neighborhood radius (1 → 3x3, 2 → 5x5) and number of ranks summed."""

    radius: int = 1
    m: int = 4

    def __post_init__(self) -> None:
        if self.radius not in (1, 2):
            raise ValueError("ROAD radius must be 1 or 2")
        if not 1 <= self.m <= (2 * self.radius + 1) ** 2 - 1:
            raise ValueError(f"m={self.m} out of range for radius {self.radius}")


ROAD_3x3 = RoadConfig(1, 4)
ROAD_5x5 = RoadConfig(2, 12)


@njit(parallel=True, cache=True)
def _road_kernel(padded, h, w, r, m):
    out = np.empty((h, w))
    n = (2 * r + 1) ** 2 - 1
    for y in prange(h):
        diffs = np.empty(n)
        for x in range(w):
            c = padded[y + r, x + r]
            k = 0
            for dy in range(-r, r + 1):
                for dx in range(-r, r + 1):
                    if dy == 0 and dx == 0:
                        continue
                    diffs[k] = abs(c - padded[y + r + dy, x + r + dx])
                    k += 1
            diffs.sort()
            s = 0.0
            for k in range(m):
                s += diffs[k]
            out[y, x] = s
    return out


def road(img: ImageLike, cfg: RoadConfig = ROAD_3x3) -> np.ndarray:
    """Per-pixel sum of the m smallest absolute differences to the neighbors."""
    arr = as_array(img)
    h, w = arr.shape
    return _road_kernel(reflect(arr, cfg.radius), h, w, cfg.radius, cfg.m)


def impulse_factor(road_value, sigma_i: float):
    """w_I = exp(-ROAD²/(2σ_I²)); works on scalars and arrays, σ_I may be inf."""
    if not sigma_i > 0:
        raise ValueError("sigma_I must be positive")
    r = np.asarray(road_value, dtype=np.float64)
    out = np.exp(-(r * r) / (2.0 * sigma_i * sigma_i))
    return float(out) if out.ndim == 0 else out


def joint_impulse_factor(road_i, road_j, sigma_j: float):
    """J_I = exp(-((ROAD_i + ROAD_j)/2)²/(2σ_J²)), symmetric in (i, j)."""
    if not sigma_j > 0:
        raise ValueError("sigma_J must be positive")
    mean = 0.5 * (np.asarray(road_i, dtype=np.float64) + np.asarray(road_j, dtype=np.float64))
    out = np.exp(-(mean * mean) / (2.0 * sigma_j * sigma_j))
    return float(out) if out.ndim == 0 else out


def log_impulse_factor(road_values: np.ndarray, sigma_i: float) -> np.ndarray:
    if math.isinf(sigma_i):
        return np.zeros_like(road_values)
    return -(road_values * road_values) / (2.0 * sigma_i * sigma_i)


def export_road(roadmap: np.ndarray, path: str | Path) -> None:
    """``.csv`` keeps exact values (row, col, road); anything else is a rescaled PGM."""
    p = Path(path)
    if p.suffix.lower() == ".csv":
        with p.open("w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["row", "col", "road"])
            for (y, x), v in np.ndenumerate(roadmap):
                out.writerow([y, x, repr(float(v))])
    else:
        write_pgm(p, rescaled(roadmap))

