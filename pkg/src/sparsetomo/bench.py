"""Method dispatch and the (method, scenario, seed) benchmark harness."""
from __future__ import annotations

import math
import multiprocessing
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from .core import ImageGrid, Method, ReconConfig, Sinogram, ValidationError, validate
from .iterative import DivergenceError, ReconReport, run_iterative
from .metrics import psnr, ssim
from .projection import ProjectionGeometry
from .simulation import NoiseSpec, PhantomKind, make_scenario
from .sparse_filter import sfbp_reconstruct
from .spectral import FilterKind, FilterTag, fbp_reconstruct

BENCH_COLUMNS = ("method", "scenario", "seed", "psnr_db", "ssim", "iterations", "wall_ms", "status")


def reconstruct(
    sino: Sinogram, geom: ProjectionGeometry, config: ReconConfig, ground_truth: Optional[ImageGrid] = None
) -> ReconReport:
    """Run any method; analytic methods report zero iterations."""
    validate(config)
    if config.method is Method.FBP:
        img = fbp_reconstruct(sino, FilterKind(FilterTag(config.resolved_filter.value)), geom)
        return ReconReport(img, stop_reason="analytic")
    if config.method is Method.SFBP:
        img, sup = sfbp_reconstruct(
            sino, geom, norm=config.gmdl_norm, ramp=config.gmdl_ramp, force_lambda=config.force_lambda
        )
        return ReconReport(img, supports=[sup], stop_reason="analytic")
    return run_iterative(sino, geom, config, ground_truth)


def parse_intensity(text: str) -> float:
    """Accepts plain floats and ``10^x`` notation."""
    text = text.strip()
    m = re.fullmatch(r"10\^([-+]?[0-9.]+)", text)
    if m:
        return 10.0 ** float(m.group(1))
    return float(text)


@dataclass
class BenchConfig:
    phantoms: List[str] = field(default_factory=lambda: ["threedot"])
    intensities: List[float] = field(default_factory=lambda: [1e3])
    ranges: List[float] = field(default_factory=lambda: [90.0])
    seeds: List[int] = field(default_factory=lambda: [0])
    methods: List[str] = field(default_factory=lambda: ["fbp", "sfbp"])
    size: int = 64
    step: float = 1.0
    noise_model: str = "scaled"
    max_iters: int = 100
    eps: float = 1e-3
    relax: float = 1.0
    gmdl_norm: str = "paper"
    fsirt_filter: str = "cosine"
    fbp_filter: str = "ramlak"
    workers: int = 1
    timing: bool = True

    _LISTS = {"phantoms": str, "intensities": parse_intensity, "ranges": float, "seeds": int, "methods": str}
    _SCALARS = {
        "size": int, "step": float, "noise_model": str, "max_iters": int, "eps": float, "relax": float,
        "gmdl_norm": str, "fsirt_filter": str, "fbp_filter": str, "workers": int,
    }

    @classmethod
    def parse(cls, text: str) -> "BenchConfig":
        cfg = cls()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"bench config line {lineno}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            if key in cls._LISTS:
                conv = cls._LISTS[key]
                items = [conv(v.strip()) for v in val.split(",") if v.strip()]
                if not items:
                    raise ValidationError(f"bench config: {key} is empty")
                setattr(cfg, key, items)
            elif key in cls._SCALARS:
                setattr(cfg, key, cls._SCALARS[key](val))
            elif key == "timing":
                cfg.timing = val.lower() in ("1", "true", "yes", "on")
            else:
                raise ValidationError(f"bench config line {lineno}: unknown key {key!r}")
        for p in cfg.phantoms:
            PhantomKind(p)
        for m in cfg.methods:
            Method(m)
        return cfg

    @classmethod
    def load(cls, path) -> "BenchConfig":
        with open(path) as fh:
            return cls.parse(fh.read())

    def recon_config(self, method: str) -> ReconConfig:
        method = Method(method)
        filt = None
        if method is Method.FBP:
            filt = self.fbp_filter
        elif method is Method.FSIRT:
            filt = self.fsirt_filter
        return ReconConfig(
            method=method, filter_kind=filt, max_iters=self.max_iters, stop_eps=self.eps,
            relaxation=self.relax, gmdl_norm=self.gmdl_norm,
        )

    def scenarios(self):
        for ph in self.phantoms:
            for P in self.intensities:
                for r in self.ranges:
                    yield f"{ph}_P{P:.6g}_r{r:g}", ph, P, r

    def cells(self):
        for method in self.methods:
            for label, ph, P, r in self.scenarios():
                for seed in self.seeds:
                    yield method, label, ph, P, r, seed


def run_cell(cfg: BenchConfig, cell) -> tuple:
    method, label, ph, P, r, seed = cell
    truth, sino = make_scenario(ph, cfg.size, r, cfg.step, NoiseSpec(P, seed, cfg.noise_model))
    geom = ProjectionGeometry.for_sinogram(sino, cfg.size)
    t0 = time.perf_counter()
    try:
        rep = reconstruct(sino, geom, cfg.recon_config(method))
        status = rep.stop_reason
    except DivergenceError:
        return (method, label, seed, math.nan, math.nan, cfg.max_iters, None, "diverged")
    wall = (time.perf_counter() - t0) * 1e3 if cfg.timing else 0.0
    return (method, label, seed, psnr(rep.image, truth), ssim(rep.image, truth), rep.iterations, wall, status)


def run_bench(cfg: BenchConfig) -> List[tuple]:
    """One row per (method, scenario, seed), in config order regardless of worker count."""
    cells = list(cfg.cells())
    if cfg.workers > 1:
        # spawn, not fork: the projector's OpenMP runtime is not fork-safe
        with ProcessPoolExecutor(cfg.workers, mp_context=multiprocessing.get_context("spawn")) as pool:
            return list(pool.map(run_cell, [cfg] * len(cells), cells))
    return [run_cell(cfg, c) for c in cells]
