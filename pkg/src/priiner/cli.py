"""Command-line interface: ``priiner {simulate,reconstruct,evaluate,benchmark}``.

Exit codes: 0 success, 1 I/O failure, 2 usage or validation error,
3 numerical failure.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np
from threadpoolctl import threadpool_limits

from ._exceptions import ConfigError, DivergenceError, NpyFormatError, UnsupportedDtypeError
from .config import PRIOR_KINDS, config_from_dict, load_config
from .csm import normalize_rss
from .dataio import ensure_dir, read_npy, write_json
from .kspace import SamplingMask, make_equispaced_mask
from .metrics import psnr, ssim
from .optim import reconstruct
from .pipeline import (
    DEFAULT_METHODS, BenchmarkPlan, evaluate_pairs, rows_to_csv, run_benchmark, save_inr,
    save_result, thread_limit, trace_csv, write_simulation,
)
from .priors import PriorSpec, make_prior

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

logger = logging.getLogger("priiner")


class UsageError(Exception):
    pass


def _int_list(text):
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _str_list(text):
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _positive(name):
    def parse(text):
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer, got {text!r}")
        if value < 1:
            raise argparse.ArgumentTypeError(f"{name} must be >= 1, got {value}")
        return value
    return parse


def _nonneg_float(name):
    def parse(text):
        try:
            value = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {text!r}")
        if not np.isfinite(value) or value < 0:
            raise argparse.ArgumentTypeError(f"{name} must be finite and nonnegative")
        return value
    return parse


# -- simulate -------------------------------------------------------------------

def cmd_simulate(args):
    if args.size % 2:
        raise UsageError("size must be even")
    write_simulation(args.out, size=args.size, coils=args.coils, acceleration=args.acceleration,
                     center_fraction=args.center_fraction, noise_sigma=args.noise, seed=args.seed)
    print(f"wrote simulated case to {args.out}")
    return EXIT_OK


# -- reconstruct ------------------------------------------------------------------

def _load_mask(cfg, width):
    if cfg.mask_path:
        cols = read_npy(cfg.mask_path)
        mask = SamplingMask.from_uint8(cols, cfg.acceleration, cfg.center_fraction)
        if mask.width != width:
            raise UsageError(f"mask width {mask.width} does not match k-space width {width}")
        return mask
    return make_equispaced_mask(width, cfg.acceleration, cfg.center_fraction)


def cmd_reconstruct(args):
    cfg = load_config(args.config)
    overrides = {}
    for key in ("prior_kind", "iterations", "seed"):
        if getattr(args, key) is not None:
            overrides[key] = getattr(args, key)
    for key, attr in (("kspace_path", "kspace"), ("mask_path", "mask"), ("prior_path", "prior"),
                      ("truth_path", "truth"), ("output_dir", "out")):
        if getattr(args, attr) is not None:
            overrides[key] = getattr(args, attr)
    if args.dc_only:
        overrides["dc_only"] = True
    if overrides:
        cfg = config_from_dict({**cfg.to_dict(), **overrides})
    if not cfg.kspace_path:
        raise ConfigError("kspace_path", "no k-space input given")

    y = read_npy(cfg.kspace_path).astype(np.complex128)
    if y.ndim == 2:
        y = y[None]
    if y.ndim != 3:
        raise UsageError(f"k-space must have shape (coils, H, W), got {y.shape}")
    mask = _load_mask(cfg, y.shape[2])
    truth = read_npy(cfg.truth_path) if cfg.truth_path else None

    prior = None
    prior_info = {"kind": None}
    if not cfg.dc_only:
        spec = PriorSpec(cfg.prior_kind, cfg.prior_path, cfg.lowpass_fraction)
        csm0 = normalize_rss(np.ones(y.shape, dtype=np.complex128))
        prior = make_prior(spec, y, mask, csm0, truth)
        prior_info = {"kind": cfg.prior_kind, "path": cfg.prior_path,
                      "complex": bool(np.any(np.imag(prior) != 0))}
        if cfg.prior_kind == "lowpass_oracle":
            prior_info["keep_fraction"] = cfg.lowpass_fraction

    out = ensure_dir(cfg.output_dir)
    manifest = {"command": "reconstruct", "config": cfg.to_dict(), "prior": prior_info,
                "mode": "dc_only" if cfg.dc_only else "dual"}
    try:
        with threadpool_limits(limits=thread_limit()):
            result = reconstruct(cfg, y, mask, prior)
    except DivergenceError as exc:
        with open(os.path.join(out, "trace.csv"), "w") as fh:
            fh.write(trace_csv(exc.trace))
        write_json(dict(manifest, error=str(exc)), os.path.join(out, "manifest.json"))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    if truth is not None:
        image = np.abs(result.intensities)
        metrics = {"ssim": ssim(image, np.abs(truth)), "psnr": psnr(image, np.abs(truth))}
        manifest["metrics"] = metrics
        print(f"SSIM {metrics['ssim']:.4f}  PSNR {metrics['psnr']:.2f} dB")
    save_result(result, out, manifest)
    save_inr(result.theta, cfg.hash_config.resolved(*y.shape[1:]), os.path.join(out, "inr"))
    print(f"wrote reconstruction to {out}")
    return EXIT_OK


# -- evaluate ----------------------------------------------------------------------

def _collect_pairs(test, truth):
    if os.path.isdir(test) != os.path.isdir(truth):
        raise UsageError("--test and --truth must both be files or both be directories")
    if not os.path.isdir(test):
        return [(os.path.basename(test), read_npy(test), read_npy(truth))]
    names = sorted(n for n in os.listdir(test) if n.endswith(".npy"))
    pairs = [(n, read_npy(os.path.join(test, n)), read_npy(os.path.join(truth, n)))
             for n in names if os.path.exists(os.path.join(truth, n))]
    if not pairs:
        raise UsageError("no matching .npy files between the two directories")
    return pairs


def cmd_evaluate(args):
    pairs = [(name, np.abs(a), np.abs(b)) for name, a, b in _collect_pairs(args.test, args.truth)]
    rows, summary = evaluate_pairs(pairs)
    ensure_dir(args.out)
    with open(os.path.join(args.out, "metrics.csv"), "w") as fh:
        fh.write(rows_to_csv(("case", "ssim", "psnr"), rows))
    write_json(summary, os.path.join(args.out, "summary.json"))
    print(f"SSIM {summary['ssim_mean']:.4f} +- {summary['ssim_std']:.4f}  "
          f"PSNR {summary['psnr_mean']:.2f} +- {summary['psnr_std']:.2f} dB  (n={summary['n']})")
    return EXIT_OK


# -- benchmark ------------------------------------------------------------------

def cmd_benchmark(args):
    try:
        plan = BenchmarkPlan(
            accelerations=args.accelerations, methods=args.methods, seeds=args.seeds,
            size=args.size, coils=args.coils, noise_sigma=args.noise, iterations=args.iterations,
            lowpass_fraction=args.lowpass_fraction,
        )
    except ValueError as exc:
        raise UsageError(str(exc))
    rows, summary, _ = run_benchmark(plan, args.out, jobs=args.jobs)
    for row in summary:
        print(f"R={row['acceleration']:<3d} {row['method']:<28s} SSIM {row['ssim_mean']:.4f} "
              f"+- {row['ssim_std']:.4f}  PSNR {row['psnr_mean']:.2f} +- {row['psnr_std']:.2f}")
    if all(r["status"] != "ok" for r in rows):
        return EXIT_NUMERIC
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="priiner", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a simulated undersampled multi-coil case")
    p.add_argument("--size", type=_positive("size"), default=128)
    p.add_argument("--coils", type=_positive("coils"), default=4)
    p.add_argument("--acceleration", type=_positive("acceleration"), default=4)
    p.add_argument("--center-fraction", type=float, default=0.08)
    p.add_argument("--noise", type=_nonneg_float("noise"), default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="run the INR reconstruction from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--prior-kind", choices=PRIOR_KINDS)
    p.add_argument("--dc-only", action="store_true", help="drop the prior term")
    p.add_argument("--iterations", type=_positive("iterations"))
    p.add_argument("--seed", type=int)
    p.add_argument("--kspace")
    p.add_argument("--mask")
    p.add_argument("--prior")
    p.add_argument("--truth")
    p.add_argument("--out")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("evaluate", help="SSIM/PSNR of images against ground truth")
    p.add_argument("--test", required=True, help="NPY file or directory of NPY files")
    p.add_argument("--truth", required=True, help="NPY file or directory with matching names")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("benchmark", help="simulate, reconstruct and evaluate a grid of cases")
    p.add_argument("--accelerations", type=_int_list, default=(4, 6, 8, 10))
    p.add_argument("--methods", type=_str_list, default=DEFAULT_METHODS)
    p.add_argument("--seeds", type=_int_list, default=(1, 2, 3, 4, 5))
    p.add_argument("--size", type=_positive("size"), default=128)
    p.add_argument("--coils", type=_positive("coils"), default=4)
    p.add_argument("--noise", type=_nonneg_float("noise"), default=BenchmarkPlan.noise_sigma)
    p.add_argument("--iterations", type=_positive("iterations"), default=1000)
    p.add_argument("--lowpass-fraction", type=float, default=0.25)
    p.add_argument("--jobs", type=_positive("jobs"), default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except json.JSONDecodeError as exc:
        print(f"{parser.prog} {args.command}: error: invalid JSON: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, NpyFormatError, UnsupportedDtypeError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
