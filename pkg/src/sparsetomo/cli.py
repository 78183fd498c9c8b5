"""Command-line interface: ``sparsetomo <command> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Optional, Sequence

from . import io
from .bench import BENCH_COLUMNS, BenchConfig, parse_intensity, reconstruct, run_bench
from .core import ImageGrid, Method, ReconConfig, Sinogram, ValidationError, default_detector_count, validate
from .iterative import DivergenceError
from .metrics import mse, psnr, ssim
from .projection import ProjectionGeometry, radon_forward
from .simulation import NoiseSpec, PhantomKind, add_poisson_noise, make_phantom, scenario_angles
from .spectral import dft_detector_axis

log = logging.getLogger("sparsetomo")

METHODS = [m.value for m in Method]
_ITERATIVE = {"sirt", "fsirt", "sfsirt"}
_SPARSE = {"sfbp", "sfsirt"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _log_config(command: str, resolved: dict) -> None:
    log.info("%s config %s", command, json.dumps(resolved, sort_keys=True, default=str))


def _maybe_pgm(args, values):
    if getattr(args, "dump_pgm", None):
        io.write_pgm(values, args.dump_pgm)


def cmd_phantom(args):
    _log_config("phantom", {"kind": args.kind, "size": args.size, "output": args.output})
    img = make_phantom(args.kind, args.size)
    io.write_container(img, args.output)
    _maybe_pgm(args, img.values)


def cmd_project(args):
    img = io.read_container(args.input)
    if not isinstance(img, ImageGrid):
        raise UsageError("project expects an image container")
    angles = scenario_angles(args.range, args.step)
    nd = args.detectors or default_detector_count(img.size_n)
    _log_config("project", {"input": args.input, "range": args.range, "step": args.step,
                            "detectors": nd, "n_angles": len(angles), "output": args.output})
    geom = ProjectionGeometry.for_image(img, angles, nd)
    io.write_container(radon_forward(img, geom), args.output, extra={"image_size": img.size_n})


def cmd_noise(args):
    sino, head = io.read_container(args.input, with_header=True)
    if not isinstance(sino, Sinogram):
        raise UsageError("noise expects a sinogram container")
    spec = NoiseSpec(args.intensity, args.seed, args.model, args.mu)
    _log_config("noise", {"input": args.input, "model": spec.model.value, "intensity": spec.intensity_P,
                          "seed": spec.seed, "mu": spec.mu, "output": args.output})
    extra = {k: head[k] for k in ("image_size",) if k in head}
    io.write_container(add_poisson_noise(sino, spec), args.output, seed=args.seed, extra=extra)


def _check_recon_flags(args):
    m = args.method
    if args.filter is not None and m in _SPARSE:
        raise UsageError(f"--filter cannot be combined with --method {m} (it selects its own filter)")
    if args.filter is not None and m == "sirt":
        raise UsageError("--filter cannot be combined with --method sirt (plain backprojection)")
    if args.freeze_support and m != "sfsirt":
        raise UsageError("--freeze-support only applies to --method sfsirt")
    if args.gmdl_norm is not None and m not in _SPARSE:
        raise UsageError("--gmdl-norm only applies to sfbp/sfsirt")
    if m not in _ITERATIVE:
        for flag, val in (("--max-iters", args.max_iters), ("--eps", args.eps),
                          ("--relax", args.relax), ("--trace", args.trace)):
            if val is not None:
                raise UsageError(f"{flag} only applies to iterative methods")


def _recon_config(args) -> ReconConfig:
    cfg = ReconConfig(
        method=args.method,
        filter_kind=args.filter,
        max_iters=args.max_iters if args.max_iters is not None else 100,
        stop_eps=args.eps if args.eps is not None else 1e-3,
        relaxation=args.relax if args.relax is not None else 1.0,
        gmdl_norm=args.gmdl_norm or "paper",
        freeze_support=args.freeze_support,
    )
    validate(cfg)
    return cfg


def _image_size(args, sino: Sinogram, head: dict) -> int:
    if args.size:
        return args.size
    if "image_size" in head:
        return int(head["image_size"])
    raise UsageError("sinogram has no image_size metadata; pass --size")


def _reconstruct_one(args, cfg, sino, head, truth=None):
    geom = ProjectionGeometry.for_sinogram(sino, _image_size(args, sino, head))
    return reconstruct(sino, geom, cfg, truth), sino


def cmd_reconstruct(args):
    _check_recon_flags(args)
    cfg = _recon_config(args)
    sino, head = io.read_container(args.input, with_header=True)
    if not isinstance(sino, Sinogram):
        raise UsageError("reconstruct expects a sinogram container")
    truth = io.read_container(args.truth) if args.truth else None
    resolved = dict(cfg.as_dict(), input=args.input, output=args.output,
                    size=_image_size(args, sino, head))
    _log_config("reconstruct", resolved)
    report, _ = _reconstruct_one(args, cfg, sino, head, truth)
    io.write_container(report.image, args.output, seed=head.get("seed"))
    if args.trace:
        io.write_trace_csv(args.trace, report.trace)
    if report.supports:
        freqs = dft_detector_axis(sino).freqs
        if args.support_csv:
            io.write_support_csv(args.support_csv, report.supports, freqs)
        if args.gmdl_csv:
            io.write_gmdl_csv(args.gmdl_csv, report.supports)
    _maybe_pgm(args, report.image.values)
    if report.iterations:
        log.info("stopped after %d iterations (%s)", report.iterations, report.stop_reason)


def cmd_evaluate(args):
    img = io.read_container(args.input)
    ref = io.read_container(args.ref)
    if not (isinstance(img, ImageGrid) and isinstance(ref, ImageGrid)):
        raise UsageError("evaluate expects two image containers")
    names = [m.strip() for m in args.metrics.split(",") if m.strip()]
    funcs = {"psnr": psnr, "ssim": ssim, "mse": mse}
    bad = [n for n in names if n not in funcs]
    if bad or not names:
        raise UsageError(f"unknown metrics: {','.join(bad) or '(none)'}")
    _log_config("evaluate", {"input": args.input, "ref": args.ref, "metrics": names, "output": args.output})
    row = [os.path.basename(args.input), os.path.basename(args.ref)] + [funcs[n](img, ref) for n in names]
    header = ["image", "reference"] + [{"psnr": "psnr_db"}.get(n, n) for n in names]
    io.write_csv(args.output, header, [row])


def cmd_bench(args):
    cfg = BenchConfig.load(args.config)
    if args.workers:
        cfg.workers = args.workers
    if args.no_timing:
        cfg.timing = False
    _log_config("bench", {k: v for k, v in vars(cfg).items()})
    io.write_csv(args.output, BENCH_COLUMNS, run_bench(cfg))


def cmd_stack(args):
    _check_recon_flags(args)
    cfg = _recon_config(args)
    names = sorted(f for f in os.listdir(args.slices) if os.path.isfile(os.path.join(args.slices, f)))
    if not names:
        raise UsageError(f"no slice files in {args.slices}")
    os.makedirs(args.output, exist_ok=True)
    _log_config("stack", dict(cfg.as_dict(), slices=args.slices, output=args.output, n_slices=len(names)))
    for name in names:
        sino, head = io.read_container(os.path.join(args.slices, name), with_header=True)
        if not isinstance(sino, Sinogram):
            raise UsageError(f"{name} is not a sinogram container")
        report, _ = _reconstruct_one(args, cfg, sino, head)
        io.write_container(report.image, os.path.join(args.output, name), seed=head.get("seed"))


def _add_recon_flags(p, require_method=True):
    p.add_argument("--method", choices=METHODS, required=require_method)
    p.add_argument("--filter", choices=["ramlak", "hann", "cosine"])
    p.add_argument("--max-iters", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--relax", type=float)
    p.add_argument("--freeze-support", action="store_true")
    p.add_argument("--gmdl-norm", choices=["paper", "rss"])
    p.add_argument("--size", type=int, help="output image size (default: from sinogram metadata)")
    p.add_argument("--trace")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sparsetomo", description="Sparse filtered backprojection and SIRT variants")
    parser.add_argument("--log-level", default="INFO")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("phantom")
    p.add_argument("--kind", required=True, choices=[k.value for k in PhantomKind])
    p.add_argument("--size", type=int, required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--dump-pgm")
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("project")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--range", type=float, required=True)
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("--detectors", type=int)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("noise")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--model", choices=["scaled", "transmission"], default="scaled")
    p.add_argument("--intensity", type=parse_intensity, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mu", type=float, default=4.0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("reconstruct")
    p.add_argument("-i", "--input", required=True)
    _add_recon_flags(p)
    p.add_argument("--truth", help="ground-truth image; adds per-iteration PSNR to the trace")
    p.add_argument("--support-csv")
    p.add_argument("--gmdl-csv")
    p.add_argument("--dump-pgm")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("evaluate")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--metrics", default="psnr,ssim")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int)
    p.add_argument("--no-timing", action="store_true", help="write wall_ms as 0 for byte-stable output")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("stack")
    p.add_argument("--slices", required=True)
    _add_recon_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_stack)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    log.handlers[:] = [handler]
    log.propagate = False
    try:
        args = build_parser().parse_args(argv)
        log.setLevel(args.log_level.upper())
        args.func(args)
    except (UsageError, ValidationError, io.ContainerError, DivergenceError, OSError) as exc:
        print(f"sparsetomo: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
