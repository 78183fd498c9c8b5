"""Shared data model: image grids, angle sets, sinograms and reconstruction config.

Coordinate conventions used throughout the package:

* Image pixel ``(row, col) = (0, 0)`` is the top-left corner. The grid center
  sits at ``((n - 1) / 2, (n - 1) / 2)``. Physical coordinates are
  ``x = (col - c) * pixel_size`` and ``y = (c - row) * pixel_size``.
* Detector bin ``i`` sits at signed offset ``(i - (n_det - 1) / 2) * spacing``.
* Sinogram arrays are detector-major, shape ``(n_detectors, n_angles)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np


class ValidationError(ValueError):
    """Raised when a value object or configuration violates its invariants."""


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def default_detector_count(size_n: int) -> int:
    """ceil(sqrt(2) * n), rounded up to even, so diagonal rays are not clipped."""
    nd = math.ceil(math.sqrt(2.0) * size_n)
    return nd + (nd % 2)


@dataclass(frozen=True)
class ImageGrid:
    values: np.ndarray
    pixel_size: float = 1.0

    def __post_init__(self):
        arr = _frozen_array(self.values)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise ValidationError(f"image must be a non-empty square array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("image values must be finite")
        if not (self.pixel_size > 0 and math.isfinite(self.pixel_size)):
            raise ValidationError("pixel_size must be positive")
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "pixel_size", float(self.pixel_size))

    @property
    def size_n(self) -> int:
        return self.values.shape[0]

    @classmethod
    def zeros(cls, size_n: int, pixel_size: float = 1.0) -> "ImageGrid":
        return cls(np.zeros((size_n, size_n)), pixel_size)

    def __eq__(self, other):
        if not isinstance(other, ImageGrid):
            return NotImplemented
        return self.pixel_size == other.pixel_size and np.array_equal(self.values, other.values)

    __hash__ = None


@dataclass(frozen=True)
class AngleSet:
    """Strictly increasing projection angles in degrees, each in (-90, 90]."""

    angles_deg: tuple

    def __post_init__(self):
        vals = tuple(float(a) for a in np.atleast_1d(np.asarray(self.angles_deg, dtype=float)))
        if not vals:
            raise ValidationError("angle set must be non-empty")
        if not all(math.isfinite(a) for a in vals):
            raise ValidationError("angles must be finite")
        if any(not (-90.0 < a <= 90.0) for a in vals):
            raise ValidationError("angles must lie in (-90, 90] degrees")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValidationError("angles must be strictly increasing")
        object.__setattr__(self, "angles_deg", vals)

    def __len__(self):
        return len(self.angles_deg)

    @property
    def radians(self) -> np.ndarray:
        return np.deg2rad(np.asarray(self.angles_deg))

    def quadrature_weight(self) -> float:
        """Per-angle weight of the Riemann sum over the half circle.

        A full uniform half-circle gets pi / n; a truncated (limited-angle)
        range keeps its actual spacing so the missing sector simply drops out
        of the sum instead of rescaling the measured ones.
        """
        n = len(self.angles_deg)
        if n == 1:
            return math.pi
        span = math.radians(self.angles_deg[-1] - self.angles_deg[0])
        return min(math.pi / n, span / (n - 1))

    @classmethod
    def uniform(cls, n: int) -> "AngleSet":
        """n equally spaced angles covering the half circle, ending at 90."""
        return cls(tuple(90.0 - 180.0 * k / n for k in range(n - 1, -1, -1)))


@dataclass(frozen=True)
class Sinogram:
    values: np.ndarray
    angles: AngleSet
    detector_spacing: float = 1.0

    def __post_init__(self):
        arr = _frozen_array(self.values)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ValidationError(f"sinogram must be a 2-D (detectors, angles) array, got {arr.shape}")
        if arr.shape[1] != len(self.angles):
            raise ValidationError(
                f"sinogram has {arr.shape[1]} angle columns but {len(self.angles)} angles"
            )
        if not np.all(np.isfinite(arr)):
            raise ValidationError("sinogram values must be finite")
        if not (self.detector_spacing > 0 and math.isfinite(self.detector_spacing)):
            raise ValidationError("detector_spacing must be positive")
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "detector_spacing", float(self.detector_spacing))

    @property
    def n_detectors(self) -> int:
        return self.values.shape[0]

    @property
    def n_angles(self) -> int:
        return self.values.shape[1]

    def offsets(self) -> np.ndarray:
        nd = self.n_detectors
        return (np.arange(nd) - (nd - 1) / 2.0) * self.detector_spacing

    def with_values(self, values) -> "Sinogram":
        return Sinogram(values, self.angles, self.detector_spacing)

    def __eq__(self, other):
        if not isinstance(other, Sinogram):
            return NotImplemented
        return (
            self.angles == other.angles
            and self.detector_spacing == other.detector_spacing
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


@dataclass(frozen=True)
class SpectralSinogram:
    """Unitary DFT coefficients of a sinogram along the detector axis.

    ``coeffs`` has shape ``(n_freq, n_angles)`` in FFT bin order; ``freqs``
    maps each bin to its signed frequency in cycles per unit length.
    ``n_detectors`` remembers the unpadded length so the inverse can crop.
    """

    coeffs: np.ndarray
    angles: AngleSet
    detector_spacing: float
    n_detectors: int

    def __post_init__(self):
        arr = _frozen_array(self.coeffs, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[1] != len(self.angles):
            raise ValidationError("coeffs must be (n_freq, n_angles)")
        if self.n_detectors > arr.shape[0]:
            raise ValidationError("n_detectors cannot exceed n_freq")
        object.__setattr__(self, "coeffs", arr)

    @property
    def n_freq(self) -> int:
        return self.coeffs.shape[0]

    @property
    def freqs(self) -> np.ndarray:
        return np.fft.fftfreq(self.n_freq, d=self.detector_spacing)

    def partner_bins(self) -> np.ndarray:
        """Index of the bin holding -omega for each bin."""
        return (-np.arange(self.n_freq)) % self.n_freq

    def with_coeffs(self, coeffs) -> "SpectralSinogram":
        return SpectralSinogram(coeffs, self.angles, self.detector_spacing, self.n_detectors)


@dataclass(frozen=True)
class FrequencySupport:
    """Frequency bins kept by the sparse filter, with the selection trace."""

    support: frozenset
    lam: float
    energies: np.ndarray
    gmdl_scores: np.ndarray = field(default_factory=lambda: np.zeros(0))
    k_star: int = 0

    def __post_init__(self):
        object.__setattr__(self, "support", frozenset(int(i) for i in self.support))
        object.__setattr__(self, "energies", _frozen_array(self.energies))
        object.__setattr__(self, "gmdl_scores", _frozen_array(self.gmdl_scores))
        if self.lam < 0:
            raise ValidationError("lambda must be non-negative")

    @property
    def n_freq(self) -> int:
        return self.energies.shape[0]

    def mask(self) -> np.ndarray:
        m = np.zeros(self.n_freq, dtype=bool)
        if self.support:
            m[np.fromiter(self.support, dtype=np.int64)] = True
        return m


class Method(str, enum.Enum):
    FBP = "fbp"
    SFBP = "sfbp"
    SIRT = "sirt"
    FSIRT = "fsirt"
    SFSIRT = "sfsirt"


class FilterName(str, enum.Enum):
    RAMLAK = "ramlak"
    HANN = "hann"
    COSINE = "cosine"
    SPARSE = "sparse"


_SPARSE_METHODS = {Method.SFBP, Method.SFSIRT}


@dataclass(frozen=True)
class ReconConfig:
    method: Method = Method.FBP
    filter_kind: Optional[FilterName] = None
    max_iters: int = 100
    stop_eps: float = 1e-3
    relaxation: float = 1.0
    rng_seed: int = 0
    gmdl_norm: str = "paper"
    gmdl_ramp: bool = True
    freeze_support: bool = False
    force_lambda: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.filter_kind is not None:
            object.__setattr__(self, "filter_kind", FilterName(self.filter_kind))

    @property
    def resolved_filter(self) -> Optional[FilterName]:
        if self.filter_kind is not None:
            return self.filter_kind
        return {
            Method.FBP: FilterName.RAMLAK,
            Method.FSIRT: FilterName.COSINE,
            Method.SFBP: FilterName.SPARSE,
            Method.SFSIRT: FilterName.SPARSE,
            Method.SIRT: None,
        }[self.method]

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = v.value if isinstance(v, enum.Enum) else v
        out["filter_kind"] = None if self.resolved_filter is None else self.resolved_filter.value
        return out


def validate(config: ReconConfig) -> None:
    """Raise :class:`ValidationError` naming the offending field, else return None."""
    if not isinstance(config.max_iters, (int, np.integer)) or config.max_iters < 1:
        raise ValidationError(f"max_iters must be an integer >= 1, got {config.max_iters!r}")
    if not (config.stop_eps > 0 and math.isfinite(config.stop_eps)):
        raise ValidationError(f"stop_eps must be > 0, got {config.stop_eps!r}")
    if not (config.relaxation > 0 and math.isfinite(config.relaxation)):
        raise ValidationError(f"relaxation must be > 0, got {config.relaxation!r}")
    if config.gmdl_norm not in ("paper", "rss"):
        raise ValidationError(f"gmdl_norm must be 'paper' or 'rss', got {config.gmdl_norm!r}")
    if config.force_lambda is not None and not config.force_lambda >= 0:
        raise ValidationError("force_lambda must be >= 0")
    filt = config.resolved_filter
    if config.method in _SPARSE_METHODS:
        if filt is not FilterName.SPARSE:
            raise ValidationError(
                f"filter_kind: {config.method.value} selects its own sparse filter, got {filt.value}"
            )
    elif filt is FilterName.SPARSE:
        raise ValidationError(f"filter_kind: sparse is only valid for sfbp/sfsirt, not {config.method.value}")
