"""Impulse and mixed Gaussian-impulse noise removal by patch-based weighted means."""

import warnings

warnings.filterwarnings("ignore", message="The TBB threading layer requires TBB version")

from .image import (  # noqa: E402
    GrayImage,
    PatchKernel,
    mirror_pad,
    patch,
    patch_distance2,
    read_image,
    read_pgm,
    write_image,
    write_pgm,
)
from .metrics import BenchCase, bench_run, psnr  # noqa: E402
from .nlm import NlmParams, nlm_denoise  # noqa: E402
from .noise import NoiseSpec, add_gaussian, add_impulse, add_mixed  # noqa: E402
from .pwmf import NoiseKind, PwmfParams, auto_params, pwmf_denoise, pwmf_norm2  # noqa: E402
from .road import RoadConfig, impulse_factor, joint_impulse_factor, road  # noqa: E402
from .similarity import DsReport, ds_map, t_alpha  # noqa: E402
from .trif import TrifParams, trif_denoise, trif_iterate  # noqa: E402

__version__ = "0.1.0"
