"""PSNR and the benchmark harness that reproduces the evaluation protocol."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .image import GrayImage, ImageLike, as_array, read_image
from .nlm import NlmParams, nlm_denoise
from .noise import NoiseSpec
from .pwmf import NoiseKind, PwmfParams, auto_params, pwmf_denoise, search_diameter
from .trif import TrifParams, baseline_protocol, trif_iterate

CSV_HEADER = ("image", "method", "sigma", "p", "seed", "psnr_db", "seconds")
METHODS = ("nlm", "trif", "pwmf")


def psnr(restored: ImageLike, original: ImageLike, crop: int = 0) -> float:
    """10·log10(255²·|I| / Σ(restored - original)²); ``inf`` when identical."""
    a = as_array(restored).astype(np.float64)
    b = as_array(original).astype(np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if crop:
        a = a[crop:-crop, crop:-crop]
        b = b[crop:-crop, crop:-crop]
    sse = float(np.sum((a - b) ** 2))
    if sse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0**2 * a.size / sse)


def default_crop(image_id: str) -> int:
    """Peppers images are scored without their 1-pixel border."""
    return 1 if "pepper" in Path(image_id).stem.lower() else 0


def noise_kind(noise: NoiseSpec) -> NoiseKind:
    if noise.kind == "mixed" and noise.p == 0:
        return NoiseKind.GAUSSIAN
    if noise.kind == "mixed" and noise.sigma == 0:
        return NoiseKind.IMPULSE
    return NoiseKind(noise.kind)


def auto_nlm_params(sigma: float) -> NlmParams:
    """NL-means baseline: same d, D and σ as the Gaussian PWMF schedule."""
    return NlmParams.v0(d=9, D=search_diameter(sigma), sigma_r=3.0 + 0.4 * sigma)


@dataclass(frozen=True)
class BenchCase:
    image: str
    noise: NoiseSpec
    method: str = "pwmf"
    params: object = "auto"
    crop: Optional[int] = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.crop is not None and self.crop < 0:
            raise ValueError("crop must be nonnegative")

    @property
    def noise_spec(self) -> NoiseSpec:
        """The noise spec with this case's seed."""
        n = self.noise
        return NoiseSpec(n.kind, n.sigma, n.p, n.lo, n.hi, self.seed)

    @property
    def crop_border(self) -> int:
        return default_crop(self.image) if self.crop is None else self.crop


def denoise(noisy: ImageLike, method: str, params: object, noise: NoiseSpec) -> GrayImage:
    """Run ``method`` with explicit params, or the auto schedule for ``noise``."""
    sigma, p = noise.effective_sigma, noise.effective_p
    if method == "pwmf":
        if params == "auto":
            params = auto_params(sigma, p, noise_kind(noise))
        if not isinstance(params, PwmfParams):
            raise TypeError("pwmf needs PwmfParams or 'auto'")
        return pwmf_denoise(noisy, params)
    if method == "trif":
        schedule = None
        if params == "auto":
            params, schedule = baseline_protocol(sigma, p)
        if not isinstance(params, TrifParams):
            raise TypeError("trif needs TrifParams or 'auto'")
        return trif_iterate(noisy, params, schedule)
    if params == "auto":
        params = auto_nlm_params(sigma)
    if not isinstance(params, NlmParams):
        raise TypeError("nlm needs NlmParams or 'auto'")
    return nlm_denoise(noisy, params)


@dataclass
class BenchRow:
    image: str
    method: str
    sigma: float
    p: float
    seed: int
    psnr_db: float
    seconds: float
    error: Optional[str] = field(default=None)

    def as_csv(self) -> list[str]:
        if self.error is not None:
            score = f"error: {self.error}"
        elif math.isinf(self.psnr_db):
            score = "inf"
        else:
            score = f"{self.psnr_db:.4f}"
        return [self.image, self.method, f"{self.sigma:g}", f"{self.p:g}",
                str(self.seed), score, f"{self.seconds:.3f}"]


def run_case(case: BenchCase) -> BenchRow:
    noise = case.noise_spec
    row = BenchRow(case.image, case.method, noise.effective_sigma, noise.effective_p,
                   case.seed, math.nan, 0.0)
    try:
        original = read_image(case.image)
    except (OSError, ValueError) as exc:
        row.error = f"{type(exc).__name__}: {exc}"
        return row
    noisy = noise.apply(original)
    start = time.perf_counter()
    restored = denoise(noisy, case.method, case.params, noise)
    row.seconds = time.perf_counter() - start
    row.psnr_db = psnr(restored, original, case.crop_border)
    return row


def bench_run(cases: Sequence[BenchCase], workers: int = 1) -> list[BenchRow]:
    """Run cases, possibly concurrently; rows keep the input order."""
    if workers <= 1 or len(cases) <= 1:
        return [run_case(c) for c in cases]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_case, cases))


def rows_to_csv(rows: Iterable[BenchRow]) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(CSV_HEADER)
    for r in rows:
        out.writerow(r.as_csv())
    return buf.getvalue()


def parse_manifest(text: str, base_dir: str | Path = ".") -> list[BenchCase]:
    """One case per line of ``key=value`` tokens; ``#`` starts a comment.

    Keys: image, method, kind, sigma, p, lo, hi, seed, crop. Relative image
    paths resolve against ``base_dir``.
    """
    cases = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            kv = dict(tok.split("=", 1) for tok in line.split())
        except ValueError:
            raise ValueError(f"manifest line {lineno}: expected key=value tokens") from None
        unknown = set(kv) - {"image", "method", "kind", "sigma", "p", "lo", "hi", "seed", "crop"}
        if unknown:
            raise ValueError(f"manifest line {lineno}: unknown keys {sorted(unknown)}")
        if "image" not in kv:
            raise ValueError(f"manifest line {lineno}: missing image")
        image = Path(kv["image"])
        if not image.is_absolute():
            image = Path(base_dir) / image
        sigma = float(kv.get("sigma", 0))
        p = float(kv.get("p", 0))
        kind = kv.get("kind") or ("mixed" if sigma > 0 and p > 0 else "impulse" if p > 0 else "gaussian")
        seed = int(kv.get("seed", 0))
        noise = NoiseSpec(kind, sigma, p, float(kv.get("lo", 0)), float(kv.get("hi", 255)), seed)
        crop = int(kv["crop"]) if "crop" in kv else None
        cases.append(BenchCase(str(image), noise, kv.get("method", "pwmf"), "auto", crop, seed))
    return cases
