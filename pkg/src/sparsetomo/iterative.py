"""SIRT and its filtered variants (fSIRT, sfSIRT) with a relative-change stopping rule."""
from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .core import FilterName, FrequencySupport, ImageGrid, Method, ReconConfig, Sinogram, ValidationError, validate
from .metrics import psnr
from .projection import ProjectionGeometry, back_array, forward_array, operator_row_col_sums
from .spectral import FilterKind, FilterTag, fbp_reconstruct
from .sparse_filter import sfbp_reconstruct

log = logging.getLogger(__name__)

DIVERGENCE_FACTOR = 1e6
_TINY = np.finfo(float).tiny


class BackOp(str, enum.Enum):
    PLAIN = "plain"
    FILTERED = "filtered"
    SPARSE = "sparse"


class DivergenceError(RuntimeError):
    pass


@dataclass
class IterRecord:
    k: int
    delta: float
    psnr: Optional[float]
    wall_ms: float


@dataclass
class ReconReport:
    image: ImageGrid
    trace: List[IterRecord] = field(default_factory=list)
    supports: List[FrequencySupport] = field(default_factory=list)
    stop_reason: str = ""

    @property
    def iterations(self) -> int:
        return len(self.trace)

    @property
    def deltas(self) -> np.ndarray:
        return np.array([r.delta for r in self.trace])

    @property
    def psnrs(self) -> np.ndarray:
        return np.array([np.nan if r.psnr is None else r.psnr for r in self.trace])


class SirtNormalizer:
    """Inverse row/column weight sums for the normalised C A^T R update."""

    def __init__(self, geom: ProjectionGeometry):
        rows, cols = operator_row_col_sums(geom)
        self.inv_rows = np.divide(1.0, rows, out=np.zeros_like(rows), where=rows > 1e-12)
        self.inv_cols = np.divide(1.0, cols, out=np.zeros_like(cols), where=cols > 1e-12)


def sirt_step(
    f_k: ImageGrid,
    sino: Sinogram,
    geom: ProjectionGeometry,
    back_op: BackOp = BackOp.PLAIN,
    relaxation: float = 1.0,
    filter_kind: Optional[FilterKind] = None,
    normalizer: Optional[SirtNormalizer] = None,
    support: Optional[FrequencySupport] = None,
    gmdl_norm: str = "paper",
    gmdl_ramp: bool = True,
):
    """One update ``f + relaxation * B(p - A f)``. Returns ``(image, support_or_None)``."""
    back_op = BackOp(back_op)
    if f_k.size_n != geom.size_n:
        raise ValidationError("image does not match geometry")
    resid = sino.values - forward_array(f_k.values, geom)
    used = None
    if back_op is BackOp.PLAIN:
        norm = normalizer or SirtNormalizer(geom)
        update = norm.inv_cols * back_array(norm.inv_rows * resid, geom)
    elif back_op is BackOp.FILTERED:
        if filter_kind is None or filter_kind.tag is FilterTag.SPARSE:
            raise ValidationError("filtered back-op needs a ramlak/hann/cosine filter")
        update = fbp_reconstruct(sino.with_values(resid), filter_kind, geom).values
    else:
        if not np.any(resid):
            update = np.zeros_like(f_k.values)
        else:
            img, used = sfbp_reconstruct(
                sino.with_values(resid), geom, norm=gmdl_norm, ramp=gmdl_ramp, support=support
            )
            update = img.values
    return ImageGrid(f_k.values + relaxation * update, f_k.pixel_size), used


def _back_op_for(config: ReconConfig):
    if config.method is Method.SIRT:
        return BackOp.PLAIN, None
    if config.method is Method.FSIRT:
        return BackOp.FILTERED, FilterKind(FilterTag(config.resolved_filter.value))
    if config.method is Method.SFSIRT:
        return BackOp.SPARSE, None
    raise ValidationError(f"method {config.method.value} is not iterative")


def run_iterative(
    sino: Sinogram,
    geom: ProjectionGeometry,
    config: ReconConfig,
    ground_truth: Optional[ImageGrid] = None,
    initial: Optional[ImageGrid] = None,
) -> ReconReport:
    """Iterate from zeros until the relative change drops to ``stop_eps`` or ``max_iters``.

    The change at step k is ``||f_{k+1} - f_k|| / ||f_k||``; the first step,
    starting from zeros, uses the absolute norm.
    """
    validate(config)
    back_op, kind = _back_op_for(config)
    normalizer = SirtNormalizer(geom) if back_op is BackOp.PLAIN else None
    f = initial if initial is not None else ImageGrid.zeros(geom.size_n, geom.pixel_size)
    report = ReconReport(f)
    frozen = None
    delta0 = None
    for k in range(config.max_iters):
        t0 = time.perf_counter()
        f_next, sup = sirt_step(
            f, sino, geom, back_op, config.relaxation, kind, normalizer,
            support=frozen, gmdl_norm=config.gmdl_norm, gmdl_ramp=config.gmdl_ramp,
        )
        prev_norm = float(np.linalg.norm(f.values))
        step = float(np.linalg.norm(f_next.values - f.values))
        delta = step if k == 0 or prev_norm == 0 else step / max(prev_norm, _TINY)
        wall = (time.perf_counter() - t0) * 1e3
        q = psnr(f_next, ground_truth) if ground_truth is not None else None
        report.trace.append(IterRecord(k, delta, q, wall))
        if sup is not None:
            report.supports.append(sup)
            if config.freeze_support and frozen is None:
                frozen = sup
        f = f_next
        report.image = f
        if delta0 is None:
            delta0 = delta
        if delta0 > 0 and delta > DIVERGENCE_FACTOR * delta0 or not math.isfinite(delta):
            report.stop_reason = "diverged"
            raise DivergenceError(f"{config.method.value} diverged at iteration {k} (delta={delta:.3g})")
        if delta <= config.stop_eps:
            report.stop_reason = "converged"
            break
    else:
        report.stop_reason = "max_iters"
    log.debug("%s stopped after %d iterations (%s)", config.method.value, report.iterations, report.stop_reason)
    return report
