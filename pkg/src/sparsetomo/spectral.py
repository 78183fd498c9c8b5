"""Detector-axis DFT, ramp-family filters and filtered backprojection."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import FrequencySupport, ImageGrid, Sinogram, SpectralSinogram, ValidationError
from .projection import ProjectionGeometry, back_array

HERMITIAN_RTOL = 1e-6


class FilterTag(str, enum.Enum):
    RAMLAK = "ramlak"
    HANN = "hann"
    COSINE = "cosine"
    SPARSE = "sparse"


@dataclass(frozen=True)
class FilterKind:
    tag: FilterTag
    support: Optional[FrequencySupport] = None

    def __post_init__(self):
        object.__setattr__(self, "tag", FilterTag(self.tag))
        if (self.tag is FilterTag.SPARSE) != (self.support is not None):
            raise ValidationError("a support is required for, and only for, the sparse filter")

    @classmethod
    def sparse(cls, support: FrequencySupport) -> "FilterKind":
        return cls(FilterTag.SPARSE, support)


RAMLAK = FilterKind(FilterTag.RAMLAK)
HANN = FilterKind(FilterTag.HANN)
COSINE = FilterKind(FilterTag.COSINE)


def padded_length(n_detectors: int) -> int:
    """Next power of two >= 2 * n_detectors."""
    m = 1
    while m < 2 * n_detectors:
        m *= 2
    return m


def _hermitian_full(half: np.ndarray, m: int) -> np.ndarray:
    # rebuild the full spectrum from rfft output so that c(-w) == conj(c(w)) bit-exactly
    full = np.empty((m,) + half.shape[1:], dtype=np.complex128)
    nh = half.shape[0]
    full[:nh] = half
    full[0] = full[0].real
    if m % 2 == 0:
        full[m // 2] = full[m // 2].real
    tail = np.arange(nh, m)
    full[tail] = np.conj(half[m - tail])
    return full


def dft_detector_axis(sino: Sinogram, n_freq: Optional[int] = None) -> SpectralSinogram:
    """Unitary DFT of each projection, zero-padded to ``n_freq`` bins.

    ``n_freq`` defaults to :func:`padded_length` of the detector count; pass
    ``sino.n_detectors`` for an unpadded transform.
    """
    nd = sino.n_detectors
    m = padded_length(nd) if n_freq is None else int(n_freq)
    if m < nd:
        raise ValidationError("n_freq must be >= n_detectors")
    half = np.fft.rfft(sino.values, n=m, axis=0) / np.sqrt(m)
    return SpectralSinogram(_hermitian_full(half, m), sino.angles, sino.detector_spacing, nd)


def is_hermitian(spec: SpectralSinogram, rtol: float = HERMITIAN_RTOL) -> bool:
    c = spec.coeffs
    scale = np.linalg.norm(c)
    if scale == 0:
        return True
    return np.linalg.norm(c - np.conj(c[spec.partner_bins()])) <= rtol * scale


def idft_detector_axis(spec: SpectralSinogram, crop: bool = True) -> Sinogram:
    """Inverse of :func:`dft_detector_axis`; ``crop=False`` keeps the padded length."""
    if not is_hermitian(spec):
        raise ValidationError("spectrum is not Hermitian symmetric; inverse would be complex")
    m = spec.n_freq
    vals = np.fft.irfft(spec.coeffs[: m // 2 + 1], n=m, axis=0) * np.sqrt(m)
    if crop:
        vals = vals[: spec.n_detectors]
    return Sinogram(vals, spec.angles, spec.detector_spacing)


def filter_weights(kind: FilterKind, freqs: np.ndarray, detector_spacing: float) -> np.ndarray:
    """Per-bin weight w(omega) for the given filter on an FFT frequency grid."""
    nyq = 0.5 / detector_spacing
    a = np.abs(freqs)
    tag = kind.tag
    if tag is FilterTag.RAMLAK:
        return a
    if tag is FilterTag.HANN:
        return a * 0.5 * (1.0 + np.cos(np.pi * freqs / nyq))
    if tag is FilterTag.COSINE:
        return a * np.cos(np.pi * freqs / (2.0 * nyq))
    mask = kind.support.mask()
    if mask.shape[0] != freqs.shape[0]:
        raise ValidationError(
            f"sparse support covers {mask.shape[0]} bins but spectrum has {freqs.shape[0]}"
        )
    return a * mask


def apply_filter(spec: SpectralSinogram, kind: FilterKind) -> SpectralSinogram:
    w = filter_weights(kind, spec.freqs, spec.detector_spacing)
    return spec.with_coeffs(spec.coeffs * w[:, None])


def filter_sinogram(sino: Sinogram, kind: FilterKind) -> Sinogram:
    return idft_detector_axis(apply_filter(dft_detector_axis(sino), kind))


def fbp_scale(geom: ProjectionGeometry) -> float:
    # angular quadrature, times ds/ps^2 to undo the ray-sample area weight of the adjoint
    return geom.angles.quadrature_weight() * geom.detector_spacing / geom.pixel_size**2


def fbp_from_spectrum(spec: SpectralSinogram, kind: FilterKind, geom: ProjectionGeometry) -> ImageGrid:
    filtered = idft_detector_axis(apply_filter(spec, kind))
    return ImageGrid(back_array(filtered.values, geom) * fbp_scale(geom), geom.pixel_size)


def fbp_reconstruct(sino: Sinogram, kind: FilterKind, geom: ProjectionGeometry) -> ImageGrid:
    """Filter each projection in frequency space, then backproject."""
    if sino.angles != geom.angles or sino.n_detectors != geom.n_detectors:
        raise ValidationError("sinogram does not match geometry")
    return fbp_from_spectrum(dft_detector_axis(sino), kind, geom)
