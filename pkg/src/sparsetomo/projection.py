"""Parallel-beam Radon transform and its exact adjoint.

The forward operator is ray-driven: each ray ``x cos(t) + y sin(t) = r`` is
sampled every half pixel and the image is read with bilinear interpolation.
The backprojector replays the same samples and scatters with the same
weights, so the pair is an exact adjoint up to rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np

numba.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]

from .core import AngleSet, ImageGrid, Sinogram, ValidationError, default_detector_count

# fixed chunking of the backprojection reduction keeps results independent of thread count
_BACK_CHUNKS = 8


@dataclass(frozen=True)
class ProjectionGeometry:
    size_n: int
    angles: AngleSet
    n_detectors: Optional[int] = None
    pixel_size: float = 1.0
    detector_spacing: Optional[float] = None

    def __post_init__(self):
        if self.size_n < 1:
            raise ValidationError("size_n must be positive")
        if self.n_detectors is None:
            object.__setattr__(self, "n_detectors", default_detector_count(self.size_n))
        if self.detector_spacing is None:
            object.__setattr__(self, "detector_spacing", float(self.pixel_size))
        if self.n_detectors < 1:
            raise ValidationError("n_detectors must be positive")
        if not (self.pixel_size > 0 and self.detector_spacing > 0):
            raise ValidationError("pixel_size and detector_spacing must be positive")

    @classmethod
    def for_image(cls, image: ImageGrid, angles: AngleSet, n_detectors: Optional[int] = None):
        return cls(image.size_n, angles, n_detectors, image.pixel_size, image.pixel_size)

    @classmethod
    def for_sinogram(cls, sino: Sinogram, size_n: int, pixel_size: Optional[float] = None):
        ps = sino.detector_spacing if pixel_size is None else pixel_size
        return cls(size_n, sino.angles, sino.n_detectors, ps, sino.detector_spacing)

    @property
    def sample_step(self) -> float:
        return self.pixel_size / 2.0

    def offsets(self) -> np.ndarray:
        nd = self.n_detectors
        return (np.arange(nd) - (nd - 1) / 2.0) * self.detector_spacing

    def _trig(self):
        th = self.angles.radians
        return np.cos(th), np.sin(th)


@numba.njit(cache=True, inline="always")
def _ray_range(r, ct, st, half, dt):
    # param t along direction (-st, ct); keep samples inside the box |x|,|y| <= half
    tlo = -1e300
    thi = 1e300
    x0 = r * ct
    y0 = r * st
    if abs(st) > 1e-12:
        a = (x0 - half) / st
        b = (x0 + half) / st
        if a > b:
            a, b = b, a
        tlo = max(tlo, a)
        thi = min(thi, b)
    elif abs(x0) > half:
        return 1, 0
    if abs(ct) > 1e-12:
        a = (-half - y0) / ct
        b = (half - y0) / ct
        if a > b:
            a, b = b, a
        tlo = max(tlo, a)
        thi = min(thi, b)
    elif abs(y0) > half:
        return 1, 0
    return int(math.ceil(tlo / dt)), int(math.floor(thi / dt))


@numba.njit(cache=True, parallel=True, fastmath=True)
def _forward_kernel(img, ps, cosv, sinv, offsets, dt, out):
    n = img.shape[0]
    c = (n - 1) / 2.0
    half = (c + 1.0) * ps
    n_ang = cosv.shape[0]
    for j in numba.prange(n_ang):
        ct = cosv[j]
        st = sinv[j]
        du = -dt * st / ps
        dv = -dt * ct / ps
        for i in range(offsets.shape[0]):
            r = offsets[i]
            k0, k1 = _ray_range(r, ct, st, half, dt)
            u0 = r * ct / ps + c
            v0 = c - r * st / ps
            acc = 0.0
            for k in range(k0, k1 + 1):
                u = u0 + k * du
                v = v0 + k * dv
                iu = int(math.floor(u))
                iv = int(math.floor(v))
                fu = u - iu
                fv = v - iv
                if 0 <= iv < n:
                    if 0 <= iu < n:
                        acc += (1.0 - fu) * (1.0 - fv) * img[iv, iu]
                    if 0 <= iu + 1 < n:
                        acc += fu * (1.0 - fv) * img[iv, iu + 1]
                if 0 <= iv + 1 < n:
                    if 0 <= iu < n:
                        acc += (1.0 - fu) * fv * img[iv + 1, iu]
                    if 0 <= iu + 1 < n:
                        acc += fu * fv * img[iv + 1, iu + 1]
            out[i, j] = acc * dt


@numba.njit(cache=True, parallel=True, fastmath=True)
def _back_kernel(sino, n, ps, cosv, sinv, offsets, dt, n_chunks):
    c = (n - 1) / 2.0
    half = (c + 1.0) * ps
    n_ang = cosv.shape[0]
    bufs = np.zeros((n_chunks, n, n))
    per = (n_ang + n_chunks - 1) // n_chunks
    for ch in numba.prange(n_chunks):
        img = bufs[ch]
        for j in range(ch * per, min(n_ang, (ch + 1) * per)):
            ct = cosv[j]
            st = sinv[j]
            du = -dt * st / ps
            dv = -dt * ct / ps
            for i in range(offsets.shape[0]):
                val = sino[i, j] * dt
                if val == 0.0:
                    continue
                r = offsets[i]
                k0, k1 = _ray_range(r, ct, st, half, dt)
                u0 = r * ct / ps + c
                v0 = c - r * st / ps
                for k in range(k0, k1 + 1):
                    u = u0 + k * du
                    v = v0 + k * dv
                    iu = int(math.floor(u))
                    iv = int(math.floor(v))
                    fu = u - iu
                    fv = v - iv
                    if 0 <= iv < n:
                        if 0 <= iu < n:
                            img[iv, iu] += (1.0 - fu) * (1.0 - fv) * val
                        if 0 <= iu + 1 < n:
                            img[iv, iu + 1] += fu * (1.0 - fv) * val
                    if 0 <= iv + 1 < n:
                        if 0 <= iu < n:
                            img[iv + 1, iu] += (1.0 - fu) * fv * val
                        if 0 <= iu + 1 < n:
                            img[iv + 1, iu + 1] += fu * fv * val
    out = np.zeros((n, n))
    for ch in range(n_chunks):
        out += bufs[ch]
    return out


def forward_array(values: np.ndarray, geom: ProjectionGeometry) -> np.ndarray:
    """Raw-array forward projection; returns shape (n_detectors, n_angles)."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    if values.shape != (geom.size_n, geom.size_n):
        raise ValidationError(
            f"image shape {values.shape} does not match geometry size {geom.size_n}"
        )
    cosv, sinv = geom._trig()
    out = np.empty((geom.n_detectors, len(geom.angles)))
    _forward_kernel(values, geom.pixel_size, cosv, sinv, geom.offsets(), geom.sample_step, out)
    return out


def back_array(values: np.ndarray, geom: ProjectionGeometry) -> np.ndarray:
    """Raw-array adjoint of :func:`forward_array`."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    if values.shape != (geom.n_detectors, len(geom.angles)):
        raise ValidationError(
            f"sinogram shape {values.shape} does not match geometry "
            f"({geom.n_detectors}, {len(geom.angles)})"
        )
    cosv, sinv = geom._trig()
    return _back_kernel(
        values, geom.size_n, geom.pixel_size, cosv, sinv, geom.offsets(), geom.sample_step, _BACK_CHUNKS
    )


def radon_forward(image: ImageGrid, geom: ProjectionGeometry) -> Sinogram:
    if image.pixel_size != geom.pixel_size:
        raise ValidationError("image pixel_size does not match geometry")
    return Sinogram(forward_array(image.values, geom), geom.angles, geom.detector_spacing)


def backproject(sino: Sinogram, geom: ProjectionGeometry) -> ImageGrid:
    if sino.angles != geom.angles:
        raise ValidationError("sinogram angles do not match geometry")
    return ImageGrid(back_array(sino.values, geom), geom.pixel_size)


def operator_row_col_sums(geom: ProjectionGeometry):
    """Per-ray and per-pixel sums of the system weights (SIRT normalisation)."""
    rows = forward_array(np.ones((geom.size_n, geom.size_n)), geom)
    cols = back_array(np.ones((geom.n_detectors, len(geom.angles))), geom)
    return rows, cols
