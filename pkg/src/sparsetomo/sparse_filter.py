"""Data-dependent sparse filter: hard-thresholded frequency support with gMDL-chosen threshold.

The reconstruction error of dropping a set of frequency bins equals (by
Parseval) the summed energy of those bins, so the penalised problem

    minimise  sum_{w not in W} alpha_w + lam * |W|

is solved bin-by-bin by keeping every bin with ``alpha_w >= lam``. The
threshold itself is chosen among the observed energies by minimising the
gMDL criterion.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .core import FrequencySupport, ImageGrid, Sinogram, SpectralSinogram, ValidationError
from .projection import ProjectionGeometry
from .spectral import FilterKind, dft_detector_axis, fbp_from_spectrum

GMDL_NORMS = ("paper", "rss")


def spectral_energy(spec: SpectralSinogram) -> np.ndarray:
    """alpha_i = sum over angles of |c(omega_i, theta)|^2."""
    c = spec.coeffs
    return np.sum(c.real**2 + c.imag**2, axis=1)


def threshold_support(energies, lam: float) -> FrequencySupport:
    if lam < 0:
        raise ValidationError("lambda must be >= 0")
    energies = np.asarray(energies, dtype=float)
    support = np.flatnonzero(energies >= lam)
    return FrequencySupport(frozenset(support.tolist()), float(lam), energies)


def sort_order(energies: np.ndarray) -> np.ndarray:
    """Bins by descending energy; ties go to lower |omega|, then lower bin index."""
    m = energies.shape[0]
    idx = np.arange(m)
    absfreq = np.minimum(idx, m - idx)
    return np.lexsort((idx, absfreq, -energies))


def gmdl_score(k: int, sorted_energies, total_energy: Optional[float] = None, norm: str = "paper") -> float:
    """gMDL at the threshold that keeps the ``k`` largest bins.

    ``sorted_energies`` are the (ramp-weighted) energies in selection order.
    With m bins, S the kept-signal norm and R the residual norm::

        (m/2) log R + (k/2) log((S/k) / (R/(m-k))) + log m

    ``norm="paper"`` (default) uses unsquared L2 norms for S and R;
    ``norm="rss"`` uses squared norms (energies).
    """
    e = np.asarray(sorted_energies, dtype=float)
    m = e.shape[0]
    if not 1 <= k <= m - 1:
        raise ValidationError(f"k must lie in 1..{m - 1}, got {k}")
    kept = float(np.sum(e[:k]))
    resid = float(np.sum(e[k:])) if total_energy is None else max(float(total_energy) - kept, 0.0)
    if resid <= 0:
        raise ValidationError("zero residual: full support is exact; use the lambda=0 path")
    if kept <= 0:
        raise ValidationError("no signal energy in the kept bins")
    return _gmdl(k, m, kept, resid, norm)


def _gmdl(k, m, kept, resid, norm):
    if norm == "paper":
        kept, resid = math.sqrt(kept), math.sqrt(resid)
    elif norm != "rss":
        raise ValidationError(f"unknown gmdl norm {norm!r}")
    return (m / 2.0) * math.log(resid) + (k / 2.0) * math.log((kept / k) / (resid / (m - k))) + math.log(m)


def gmdl_sweep(sorted_energies: np.ndarray, norm: str = "paper") -> np.ndarray:
    """Scores for k = 1..m-1 (index k-1); inadmissible k (zero kept or residual energy) score +inf."""
    e = np.asarray(sorted_energies, dtype=float)
    m = e.shape[0]
    if norm not in GMDL_NORMS:
        raise ValidationError(f"unknown gmdl norm {norm!r}")
    kept = np.cumsum(e)[:-1]
    resid = np.cumsum(e[::-1])[::-1][1:]
    k = np.arange(1, m, dtype=float)
    if norm == "paper":
        kept, resid = np.sqrt(kept), np.sqrt(resid)
    ok = (kept > 0) & (resid > 0)
    scores = np.full(m - 1, np.inf)
    kk, kp, rs = k[ok], kept[ok], resid[ok]
    scores[ok] = (m / 2.0) * np.log(rs) + (kk / 2.0) * np.log((kp / kk) / (rs / (m - kk))) + math.log(m)
    return scores


def selection_weights(spec: SpectralSinogram, ramp: bool = True) -> np.ndarray:
    # |omega|^2 weighting puts the norms in the reconstruction domain
    if not ramp:
        return np.ones(spec.n_freq)
    return spec.freqs**2


def select_support(
    spec: SpectralSinogram, norm: str = "paper", ramp: bool = True
) -> FrequencySupport:
    """Pick the threshold minimising gMDL over the observed energies."""
    alpha = spectral_energy(spec)
    if not np.any(alpha > 0):
        raise ValidationError("empty signal: all spectral energies are zero")
    order = sort_order(alpha)
    weighted = (alpha * selection_weights(spec, ramp))[order]
    scores = gmdl_sweep(weighted, norm)
    if not np.any(np.isfinite(scores)):
        raise ValidationError("no admissible gMDL candidate (degenerate spectrum)")
    k_star = int(np.argmin(scores)) + 1
    lam = float(alpha[order[k_star - 1]])
    sel = threshold_support(alpha, lam)
    return FrequencySupport(sel.support, lam, alpha, scores, k_star)


def sfbp_reconstruct(
    sino: Sinogram,
    geom: ProjectionGeometry,
    norm: str = "paper",
    ramp: bool = True,
    force_lambda: Optional[float] = None,
    support: Optional[FrequencySupport] = None,
):
    """Sparse filtered backprojection. Returns ``(image, support)``.

    ``force_lambda`` bypasses gMDL with a fixed threshold; ``support`` reuses a
    previously selected support as-is.
    """
    if sino.angles != geom.angles or sino.n_detectors != geom.n_detectors:
        raise ValidationError("sinogram does not match geometry")
    spec = dft_detector_axis(sino)
    if support is None:
        if force_lambda is not None:
            support = threshold_support(spectral_energy(spec), force_lambda)
        else:
            support = select_support(spec, norm, ramp)
    image: ImageGrid = fbp_from_spectrum(spec, FilterKind.sparse(support), geom)
    return image, support
