"""Monte-Carlo checks of the convergence rate of random weighted means.

The sequences (a_k, v_k) are built from an i.i.d. Gaussian base sequence g:
v_k is one base sample and a_k is an exponential patch weight computed from
the ``l`` samples around it (the sample itself excluded), compared against a
fixed reference vector. Each pair then depends on a sliding block of l + 1
base samples, which makes the sequence stationary and exactly l-dependent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np
from numba import njit, prange
from scipy import stats

from .image import GrayImage, ImageLike, as_array, reflect
from .nlm import NlmParams
from .noise import add_gaussian, derive_seeds

WeightModel = Literal["patch", "constant"]


@dataclass(frozen=True)
class SequenceSpec:
    n_values: tuple[int, ...]
    l: int = 0
    trials: int = 500
    sigma: float = 20.0
    u: float = 128.0
    weight_model: WeightModel = "constant"
    seed: int = 0
    sigma_r: Optional[float] = None

    def __post_init__(self) -> None:
        n = tuple(int(v) for v in self.n_values)
        object.__setattr__(self, "n_values", n)
        if not n or any(v < 1 for v in n) or any(b <= a for a, b in zip(n, n[1:])):
            raise ValueError("n_values must be positive and strictly increasing")
        if self.l < 0:
            raise ValueError("dependence range l must be nonnegative")
        if self.trials < 100:
            raise ValueError("need at least 100 trials")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.weight_model not in ("patch", "constant"):
            raise ValueError(f"unknown weight model {self.weight_model!r}")

    @property
    def weight_sigma(self) -> float:
        if self.sigma_r is not None:
            return self.sigma_r
        return self.sigma if self.sigma > 0 else 1.0


@dataclass(frozen=True, eq=False)
class RateReport:
    n_values: tuple[int, ...]
    mean_error: np.ndarray
    error_se: np.ndarray
    slope: Optional[float]
    slope_se: Optional[float]
    ks_distance: Optional[float]
    discarded: int = 0
    final_errors: np.ndarray = field(default=None, repr=False)

    def csv_rows(self) -> list[tuple[int, float]]:
        return [(int(n), float(e)) for n, e in zip(self.n_values, self.mean_error)]

    def summary(self) -> str:
        slope = "undefined" if self.slope is None else f"{self.slope:.4f} ± {self.slope_se:.4f}"
        ks = "degenerate" if self.ks_distance is None else f"{self.ks_distance:.4f}"
        return f"slope={slope} ks={ks} discarded={self.discarded}"


@dataclass(frozen=True)
class CltReport:
    n: int
    ks_distance: Optional[float]
    var_small_n: float
    var_large_n: float
    n_small: int

    @property
    def variance_ratio(self) -> Optional[float]:
        if self.var_small_n == 0:
            return None
        return self.var_large_n / self.var_small_n

    @property
    def degenerate(self) -> bool:
        return self.ks_distance is None


def _trial_rng(seed: int, n: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, n, trial])


def weighted_mean_error(spec: SequenceSpec, n: int, trial: int) -> Optional[float]:
    """Signed error Σa_k v_k / Σa_k - u for one trial; None if all a_k vanish."""
    rng = _trial_rng(spec.seed, n, trial)
    l = spec.l if spec.weight_model == "patch" else 0
    g = spec.u + spec.sigma * rng.standard_normal(n + l)
    left = l // 2
    v = g[left : left + n]
    if spec.weight_model == "constant" or l == 0:
        return float(v.mean() - spec.u)
    # squared deviation from the reference vector (all components = u),
    # summed over each block of l + 1 samples minus its center
    sq = (g - spec.u) ** 2
    csum = np.concatenate(([0.0], np.cumsum(sq)))
    block = csum[l + 1 : l + 1 + n] - csum[:n]
    dist = (block - sq[left : left + n]) / l
    s_r = spec.weight_sigma
    a = np.exp(-dist / (2.0 * s_r * s_r))
    total = a.sum()
    if not total > 0:
        return None
    return float(np.dot(a, v) / total - spec.u)


def _errors(spec: SequenceSpec, n: int) -> tuple[np.ndarray, int]:
    errs = [weighted_mean_error(spec, n, t) for t in range(spec.trials)]
    kept = np.array([e for e in errs if e is not None], dtype=np.float64)
    return kept, len(errs) - kept.size


def loglog_slope(n_values: Sequence[float], errors: Sequence[float]) -> tuple[Optional[float], Optional[float]]:
    """Least-squares slope of log(error) on log(n) and its standard error."""
    x = np.log(np.asarray(n_values, dtype=np.float64))
    e = np.asarray(errors, dtype=np.float64)
    if x.size < 2 or np.any(e <= 0) or not np.all(np.isfinite(e)):
        return None, None
    fit = stats.linregress(x, np.log(e))
    return float(fit.slope), float(fit.stderr)


def _ks(errors: np.ndarray) -> Optional[float]:
    sd = errors.std(ddof=1) if errors.size > 1 else 0.0
    if not sd > 0:
        return None
    return float(stats.kstest(errors / sd, "norm").statistic)


def simulate_rate(spec: SequenceSpec) -> RateReport:
    means, ses = [], []
    discarded = 0
    final = np.empty(0)
    for n in spec.n_values:
        errs, bad = _errors(spec, n)
        discarded += bad
        absd = np.abs(errs)
        means.append(absd.mean() if absd.size else math.nan)
        ses.append(absd.std(ddof=1) / math.sqrt(absd.size) if absd.size > 1 else math.nan)
        final = errs
    slope, slope_se = loglog_slope(spec.n_values, means)
    return RateReport(
        n_values=spec.n_values,
        mean_error=np.array(means),
        error_se=np.array(ses),
        slope=slope,
        slope_se=slope_se,
        ks_distance=_ks(final),
        discarded=discarded,
        final_errors=final,
    )


def clt_check(spec: SequenceSpec) -> CltReport:
    """KS distance of standardized √n·error at the largest n, plus the
    variance of √n·error at a smaller n for a stabilization check."""
    n = spec.n_values[-1]
    n_small = spec.n_values[-2] if len(spec.n_values) > 1 else max(1, n // 10)
    big, _ = _errors(spec, n)
    small, _ = _errors(spec, n_small)
    z_big = math.sqrt(n) * big
    z_small = math.sqrt(n_small) * small
    return CltReport(
        n=n,
        ks_distance=_ks(z_big),
        var_small_n=float(z_small.var(ddof=1)) if z_small.size > 1 else 0.0,
        var_large_n=float(z_big.var(ddof=1)) if z_big.size > 1 else 0.0,
        n_small=n_small,
    )


# --- NL-means on replicated textures ----------------------------------------


def tile_grid(r: int) -> tuple[int, int]:
    """Most square (rows, cols) factorization of r."""
    a = int(math.isqrt(r))
    while r % a:
        a -= 1
    return a, r // a


@njit(parallel=True, cache=True)
def _v0_kernel(padded, h, w, th, tw, rp, a, inv2s2, use_thresh, t2):
    d = 2 * rp + 1
    asum = a.sum()
    out = np.empty((h, w))
    for y in prange(h):
        for x in range(w):
            # accumulate deviations from the center so equal replicas are exact
            c = padded[y + rp, x + rp]
            num_v = 0.0
            den = 0.0
            for jy in range(y % th, h, th):
                for jx in range(x % tw, w, tw):
                    num = 0.0
                    plain = 0.0
                    for ky in range(d):
                        for kx in range(d):
                            diff = padded[y + ky, x + kx] - padded[jy + ky, jx + kx]
                            num += a[ky, kx] * diff * diff
                            plain += diff * diff
                    if use_thresh and plain > t2 and not (jy == y and jx == x):
                        continue
                    wt = math.exp(-(num / asum) * inv2s2)
                    num_v += wt * (padded[jy + rp, jx + rp] - c)
                    den += wt
            out[y, x] = c + num_v / den
    return out


def v0_on_replicas(noisy: ImageLike, tile_shape: tuple[int, int], params: NlmParams) -> GrayImage:
    """Weighted mean of each pixel over its replicas (same position modulo the
    tile), the set of patches that are similar by construction."""
    arr = as_array(noisy)
    h, w = arr.shape
    rp = params.d // 2
    inv2s2 = 0.0 if math.isinf(params.sigma_r) else 1.0 / (2.0 * params.sigma_r**2)
    t = params.similarity_threshold
    out = _v0_kernel(
        reflect(arr, rp), h, w, tile_shape[0], tile_shape[1], rp, params.norm_weights,
        inv2s2, t is not None, 0.0 if t is None else float(t) ** 2,
    )
    return GrayImage(out)


def nlm_rate_experiment(
    tile: ImageLike,
    replication: Sequence[int],
    sigma: float,
    params: NlmParams,
    seed: int = 0,
    n_seeds: int = 20,
) -> RateReport:
    """Mean |v⁰(i) - u(i)| versus the number r of texture replicas.

    For each r the tile is repeated on a near-square grid, Gaussian noise is
    added under ``n_seeds`` derived seeds, and every pixel is estimated from
    its r replicas.
    """
    base = as_array(tile)
    reps = [int(r) for r in replication]
    if any(r < 1 for r in reps) or any(b <= a for a, b in zip(reps, reps[1:])):
        raise ValueError("replication counts must be positive and increasing")
    seeds = []
    s = seed
    for _ in range(n_seeds):
        s, _unused = derive_seeds(s)
        seeds.append(s)
    means, ses = [], []
    for r in reps:
        rows, cols = tile_grid(r)
        clean = np.tile(base, (rows, cols))
        per_seed = []
        for s in seeds:
            noisy = add_gaussian(clean, sigma, s)
            est = v0_on_replicas(noisy, base.shape, params)
            per_seed.append(np.abs(est.pixels - clean).mean())
        per_seed = np.array(per_seed)
        means.append(per_seed.mean())
        ses.append(per_seed.std(ddof=1) / math.sqrt(per_seed.size) if per_seed.size > 1 else 0.0)
    slope, slope_se = loglog_slope(reps, means)
    return RateReport(
        n_values=tuple(reps),
        mean_error=np.array(means),
        error_se=np.array(ses),
        slope=slope,
        slope_se=slope_se,
        ks_distance=None,
    )
