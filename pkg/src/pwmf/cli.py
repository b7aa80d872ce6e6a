"""Command-line entry point: ``pwmf <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import _parallel
from .convergence import SequenceSpec, clt_check, nlm_rate_experiment, simulate_rate
from .image import GrayImage, PatchKernel, PgmError, read_image, write_image
from .metrics import (
    auto_nlm_params,
    bench_run,
    parse_manifest,
    psnr,
    rows_to_csv,
)
from .nlm import NlmParams, nlm_denoise
from .noise import NoiseSpec, uniform_stream
from .pwmf import NoiseKind, PwmfParams, auto_params, pwmf_denoise
from .road import ROAD_3x3, ROAD_5x5
from .similarity import ds_map
from .trif import TrifParams, baseline_protocol, trif_iterate

EXIT_OK, EXIT_USAGE, EXIT_IO = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message: str):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(float(t)) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _auto(text: str) -> tuple[float, float, NoiseKind]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("--auto expects sigma,p,kind")
    try:
        return float(parts[0]), float(parts[1]), NoiseKind(parts[2].strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _road(text: str):
    table = {"3x3": ROAD_3x3, "5x5": ROAD_5x5}
    if text not in table:
        raise argparse.ArgumentTypeError("--road expects 3x3 or 5x5")
    return table[text]


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None)

    parser = _Parser(prog="pwmf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("noise", parents=[common], help="add synthetic noise")
    p.add_argument("--kind", choices=("gaussian", "impulse", "mixed"), required=True)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--p", type=float, default=0.0)
    p.add_argument("--lo", type=float, default=0.0)
    p.add_argument("--hi", type=float, default=255.0)
    p.add_argument("input")
    p.add_argument("output")

    p = sub.add_parser("denoise", parents=[common], help="restore a noisy image")
    p.add_argument("--method", choices=("nlm", "trif", "pwmf"), required=True)
    p.add_argument("--auto", type=_auto, metavar="SIGMA,P,KIND")
    p.add_argument("--explain", action="store_true", help="print the parameters in effect")
    p.add_argument("--d", type=int)
    p.add_argument("--D", type=int)
    p.add_argument("--sigma-i", type=float)
    p.add_argument("--sigma-j", type=float)
    p.add_argument("--sigma-m", type=float)
    p.add_argument("--sigma-s", type=float)
    p.add_argument("--sigma-sm", type=float)
    p.add_argument("--sigma-r", type=float)
    p.add_argument("--road", type=_road, metavar="3x3|5x5")
    p.add_argument("--iterations", type=int)
    p.add_argument("--sigma-s-schedule", type=_floats)
    p.add_argument("--exclude-center", action="store_true")
    p.add_argument("--self-weight", choices=("computed", "max_of_others"))
    p.add_argument("--similarity-threshold", type=float)
    p.add_argument("input", nargs="?")
    p.add_argument("output", nargs="?")

    p = sub.add_parser("psnr", parents=[common], help="PSNR of two images in dB")
    p.add_argument("--crop", type=int, default=0)
    p.add_argument("restored")
    p.add_argument("original")

    p = sub.add_parser("ds", parents=[common], help="degree of similarity")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--d", type=int, default=9)
    p.add_argument("--D", type=int, default=7)
    p.add_argument("--csv", dest="csv_path")
    p.add_argument("--pgm", dest="pgm_path")
    p.add_argument("input")

    p = sub.add_parser("bench", parents=[common], help="run a benchmark manifest")
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("manifest")

    p = sub.add_parser("lab", help="convergence experiments")
    lab = p.add_subparsers(dest="lab_command", required=True, parser_class=_Parser)
    for name in ("rate", "clt"):
        q = lab.add_parser(name, parents=[common])
        q.add_argument("--n", type=_ints, default=[100, 1000, 10000, 100000] if name == "rate" else [1000, 10000])
        q.add_argument("--l", type=int, default=0)
        q.add_argument("--trials", type=int, default=500 if name == "rate" else 2000)
        q.add_argument("--sigma", type=float, default=20.0)
        q.add_argument("--u", type=float, default=128.0)
        q.add_argument("--weights", choices=("constant", "patch"), default="constant")
        q.add_argument("--sigma-r", type=float)
        q.add_argument("--out")
    q = lab.add_parser("nlm-rate", parents=[common])
    q.add_argument("--tile", help="tile image (default: 16x16 seeded random texture)")
    q.add_argument("--r", type=_ints, default=[1, 2, 4, 8, 16])
    q.add_argument("--sigma", type=float, default=20.0)
    q.add_argument("--d", type=int, default=3)
    q.add_argument("--sigma-r", type=float, default=20.0)
    q.add_argument("--seeds", type=int, default=20)
    q.add_argument("--out")
    return parser


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _pwmf_params(args) -> PwmfParams:
    params = auto_params(*args.auto) if args.auto else PwmfParams()
    overrides = {
        "d": args.d, "D": args.D, "sigma_i": args.sigma_i, "sigma_m": args.sigma_m,
        "sigma_s": args.sigma_s, "sigma_sm": args.sigma_sm, "road_cfg": args.road,
    }
    return replace(params, **{k: v for k, v in overrides.items() if v is not None})


def _trif_params(args) -> tuple[TrifParams, Optional[list[float]]]:
    schedule = None
    params = TrifParams()
    if args.auto:
        sigma, p, _kind = args.auto
        params, schedule = baseline_protocol(sigma, p)
    overrides = {
        "D": args.D, "sigma_i": args.sigma_i, "sigma_j": args.sigma_j, "sigma_s": args.sigma_s,
        "sigma_r": args.sigma_r, "road_cfg": args.road, "iterations": args.iterations,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if "iterations" in overrides or "sigma_s" in overrides:
        schedule = None
    if args.sigma_s_schedule:
        schedule = args.sigma_s_schedule
    return replace(params, **overrides), schedule


def _nlm_params(args) -> NlmParams:
    params = auto_nlm_params(args.auto[0]) if args.auto else NlmParams()
    d = args.d or params.d
    overrides = {
        "d": d, "D": args.D, "sigma_r": args.sigma_r,
        "similarity_threshold": args.similarity_threshold,
        "self_weight_policy": args.self_weight,
    }
    if args.exclude_center:
        overrides["exclude_center_norm"] = True
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return replace(params, kernel=PatchKernel.uniform(d), **overrides)


def _cmd_noise(args) -> int:
    spec = NoiseSpec(args.kind, args.sigma, args.p, args.lo, args.hi, args.seed)
    write_image(args.output, spec.apply(read_image(args.input)))
    return EXIT_OK


def _cmd_denoise(args) -> int:
    if args.method == "pwmf":
        params = _pwmf_params(args)
        explain = params.explain()
        run = lambda img: pwmf_denoise(img, params)  # noqa: E731
    elif args.method == "trif":
        tparams, schedule = _trif_params(args)
        explain = f"{tparams}\nsigma_S schedule: {schedule or [tparams.sigma_s] * tparams.iterations}"
        run = lambda img: trif_iterate(img, tparams, schedule)  # noqa: E731
    else:
        nparams = _nlm_params(args)
        explain = str(nparams)
        run = lambda img: nlm_denoise(img, nparams)  # noqa: E731
    if args.explain:
        print(explain)
    if args.input is None or args.output is None:
        if args.explain:
            return EXIT_OK
        raise UsageError("denoise needs input and output paths")
    write_image(args.output, run(read_image(args.input)))
    return EXIT_OK


def _cmd_psnr(args) -> int:
    value = psnr(read_image(args.restored), read_image(args.original), args.crop)
    print("inf" if math.isinf(value) else f"{value:.4f}")
    return EXIT_OK


def _cmd_ds(args) -> int:
    report = ds_map(read_image(args.input), args.sigma, args.alpha, args.d, args.D)
    print(report.summary())
    if args.csv_path:
        report.write_csv(args.csv_path)
    if args.pgm_path:
        report.write_pgm(args.pgm_path)
    return EXIT_OK


def _cmd_bench(args) -> int:
    manifest = Path(args.manifest)
    cases = parse_manifest(manifest.read_text(), manifest.parent)
    _emit(rows_to_csv(bench_run(cases, args.workers)), args.out)
    return EXIT_OK


def _rate_csv(report) -> str:
    lines = ["n,mean_error"] + [f"{n},{e:.10g}" for n, e in report.csv_rows()]
    return "\n".join(lines) + "\n"


def _cmd_lab(args) -> int:
    if args.lab_command in ("rate", "clt"):
        spec = SequenceSpec(tuple(args.n), args.l, args.trials, args.sigma, args.u,
                            args.weights, args.seed, args.sigma_r)
        if args.lab_command == "rate":
            report = simulate_rate(spec)
            _emit(_rate_csv(report), args.out)
            print(report.summary(), file=sys.stderr if not args.out else sys.stdout)
        else:
            clt = clt_check(spec)
            ks = "degenerate" if clt.ks_distance is None else f"{clt.ks_distance:.4f}"
            ratio = clt.variance_ratio
            print(f"n={clt.n} ks={ks} var(n={clt.n_small})={clt.var_small_n:.6g} "
                  f"var(n={clt.n})={clt.var_large_n:.6g} "
                  f"ratio={'undefined' if ratio is None else f'{ratio:.4f}'}")
        return EXIT_OK
    if args.tile:
        tile = read_image(args.tile)
    else:
        tile = GrayImage(255.0 * uniform_stream(args.seed, 0x7113, 256).reshape(16, 16))
    params = NlmParams.v0(d=args.d, D=args.d, sigma_r=args.sigma_r)
    report = nlm_rate_experiment(tile, args.r, args.sigma, params, args.seed, args.seeds)
    _emit(_rate_csv(report).replace("n,mean_error", "r,mean_error", 1), args.out)
    print(report.summary(), file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


_COMMANDS = {
    "noise": _cmd_noise, "denoise": _cmd_denoise, "psnr": _cmd_psnr,
    "ds": _cmd_ds, "bench": _cmd_bench, "lab": _cmd_lab,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _parallel.set_threads(args.threads)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (OSError, PgmError) as exc:
        print(f"pwmf: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"pwmf: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
