"""Test phantoms, Poisson noise models and limited-angle scenarios.

Phantom geometry is given in normalised coordinates ``(u, v)`` where the
image spans ``[-1, 1]`` on both axes (``u`` to the right, ``v`` up); a pixel
belongs to a shape when its center does. All phantoms lie inside the
inscribed circle and take values in ``[0, 1]``.

Box (n x n, fractions of n, half-open pixel ranges)
    outer rectangle rows [n/4, 3n/4), cols [5n/16, 11n/16), value 0.5
    inner rectangle rows [7n/16, 9n/16), cols [3n/8, 5n/8), value 1.0
ThreeDot
    background disc radius 0.8, value 0.25; three discs of radius 0.1 at
    u = -0.4, 0, 0.4 (v = 0.15), value 1.0
SheppLogan
    the modified (Toft) 10-ellipse head phantom, clipped to [0, 1]
ThoraxLike
    additive ellipse composite, see ``THORAX_ELLIPSES``
Disc
    centered disc of radius 0.6, value 1.0; edge pixels hold the covered
    area fraction (8 x 8 supersampling), so the disc is band-limited enough
    to serve as a round-trip accuracy reference
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import AngleSet, ImageGrid, Sinogram, ValidationError
from .projection import ProjectionGeometry, radon_forward

# (value, semi-axis a, semi-axis b, center u, center v, rotation deg)
SHEPP_LOGAN_ELLIPSES = (
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0),
    (-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0),
    (-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0),
    (0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0),
    (0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0),
    (0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0),
    (0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0),
    (0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0),
    (0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0),
)

THORAX_ELLIPSES = (
    (0.45, 0.85, 0.62, 0.0, 0.0, 0.0),      # body
    (-0.40, 0.28, 0.42, -0.40, 0.05, 8.0),  # right lung
    (-0.40, 0.26, 0.40, 0.40, 0.05, -8.0),  # left lung
    (0.30, 0.17, 0.15, 0.06, -0.05, 20.0),  # heart
    (0.25, 0.05, 0.05, -0.06, -0.28, 0.0),  # aorta
    (0.55, 0.09, 0.08, 0.0, -0.46, 0.0),    # vertebra
    (0.30, 0.08, 0.04, 0.0, 0.52, 0.0),     # sternum
    (0.15, 0.03, 0.03, -0.45, 0.20, 0.0),   # vessels
    (0.15, 0.025, 0.025, 0.42, -0.15, 0.0),
    (0.15, 0.02, 0.02, 0.35, 0.25, 0.0),
)

THREEDOT_DOTS = ((-0.4, 0.15), (0.0, 0.15), (0.4, 0.15))


class PhantomKind(str, enum.Enum):
    BOX = "box"
    THREEDOT = "threedot"
    SHEPPLOGAN = "shepplogan"
    THORAX = "thorax"
    DISC = "disc"


def _coords(n: int):
    c = (n - 1) / 2.0
    idx = np.arange(n)
    u = (idx - c) / (n / 2.0)
    v = (c - idx) / (n / 2.0)
    return np.meshgrid(u, v)


def _ellipses(n: int, table) -> np.ndarray:
    u, v = _coords(n)
    img = np.zeros((n, n))
    for val, a, b, u0, v0, deg in table:
        phi = math.radians(deg)
        du, dv = u - u0, v - v0
        xr = du * math.cos(phi) + dv * math.sin(phi)
        yr = -du * math.sin(phi) + dv * math.cos(phi)
        img[(xr / a) ** 2 + (yr / b) ** 2 <= 1.0] += val
    return img


def box_rectangles(n: int):
    """Pixel ranges ``((r0, r1), (c0, c1), value)`` of the box phantom."""
    q = lambda frac: int(round(frac * n))
    return (
        ((q(1 / 4), q(3 / 4)), (q(5 / 16), q(11 / 16)), 0.5),
        ((q(7 / 16), q(9 / 16)), (q(3 / 8), q(5 / 8)), 1.0),
    )


def disc_mask(n: int, radius: float = 0.6) -> np.ndarray:
    u, v = _coords(n)
    return u**2 + v**2 <= radius**2


def disc_coverage(n: int, radius: float = 0.6, supersample: int = 8) -> np.ndarray:
    """Fraction of each pixel covered by the disc, estimated on a sub-pixel grid."""
    ss = supersample
    c = (n - 1) / 2.0
    sub = (np.arange(n * ss) + 0.5) / ss - 0.5
    u, v = np.meshgrid((sub - c) / (n / 2.0), (c - sub) / (n / 2.0))
    inside = (u**2 + v**2) <= radius**2
    return inside.reshape(n, ss, n, ss).mean(axis=(1, 3))


def make_phantom(kind, size_n: int) -> ImageGrid:
    kind = PhantomKind(kind)
    if size_n < 16:
        raise ValidationError("phantom size must be >= 16")
    n = size_n
    if kind is PhantomKind.BOX:
        img = np.zeros((n, n))
        for (r0, r1), (c0, c1), val in box_rectangles(n):
            img[r0:r1, c0:c1] = val
    elif kind is PhantomKind.THREEDOT:
        u, v = _coords(n)
        img = np.where(u**2 + v**2 <= 0.8**2, 0.25, 0.0)
        for u0, v0 in THREEDOT_DOTS:
            img[(u - u0) ** 2 + (v - v0) ** 2 <= 0.1**2] = 1.0
    elif kind is PhantomKind.SHEPPLOGAN:
        img = _ellipses(n, SHEPP_LOGAN_ELLIPSES)
    elif kind is PhantomKind.THORAX:
        img = _ellipses(n, THORAX_ELLIPSES)
    else:
        img = disc_coverage(n)
    return ImageGrid(np.clip(img, 0.0, 1.0))


class NoiseModel(str, enum.Enum):
    SCALED = "scaled"
    TRANSMISSION = "transmission"


@dataclass(frozen=True)
class NoiseSpec:
    intensity_P: float
    seed: int = 0
    model: NoiseModel = NoiseModel.SCALED
    mu: float = 4.0

    def __post_init__(self):
        object.__setattr__(self, "model", NoiseModel(self.model))
        if not (self.intensity_P > 0 and math.isfinite(self.intensity_P)):
            raise ValidationError("intensity_P must be positive")
        if not self.mu > 0:
            raise ValidationError("mu must be positive")


def add_poisson_noise(sino: Sinogram, spec: NoiseSpec) -> Sinogram:
    """Poisson-corrupt a sinogram at intensity P (counts at the sinogram maximum)."""
    p = sino.values
    rng = np.random.default_rng(spec.seed)
    P = spec.intensity_P
    if spec.model is NoiseModel.SCALED:
        if np.any(p < 0):
            raise ValidationError("scaled Poisson noise needs a non-negative sinogram")
        pmax = float(p.max())
        if pmax == 0:
            return sino
        noisy = rng.poisson(P * p / pmax) * (pmax / P)
    else:
        pmax = float(np.abs(p).max())
        if pmax == 0:
            return sino
        counts = rng.poisson(P * np.exp(-spec.mu * p / pmax))
        noisy = -(pmax / spec.mu) * np.log(np.maximum(counts, 1) / P)
    return sino.with_values(noisy)


def scenario_angles(angle_range_r: float, angle_step: float = 1.0) -> AngleSet:
    """All multiples of ``angle_step`` strictly inside (-r, r)."""
    if not (0 < angle_range_r <= 90):
        raise ValidationError("angle range r must lie in (0, 90]")
    if not angle_step > 0:
        raise ValidationError("angle step must be positive")
    kmax = math.ceil(angle_range_r / angle_step) - 1
    ks = [k for k in range(-kmax, kmax + 1) if abs(k * angle_step) < angle_range_r]
    return AngleSet(tuple(k * angle_step for k in ks))


def make_scenario(
    phantom_kind,
    size_n: int,
    angle_range_r: float,
    angle_step: float = 1.0,
    noise: Optional[NoiseSpec] = None,
    n_detectors: Optional[int] = None,
):
    """Ground truth and (optionally noisy) sinogram of a limited-angle scan."""
    truth = make_phantom(phantom_kind, size_n)
    geom = ProjectionGeometry.for_image(truth, scenario_angles(angle_range_r, angle_step), n_detectors)
    sino = radon_forward(truth, geom)
    if noise is not None:
        sino = add_poisson_noise(sino, noise)
    return truth, sino
