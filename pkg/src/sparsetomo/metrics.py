"""MSE, PSNR and SSIM against a ground-truth image."""
from __future__ import annotations

import math
from typing import Optional

import numpy as np
from scipy.ndimage import correlate1d

from .core import ImageGrid, ValidationError

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5


def _pair(f_hat, f0):
    a = f_hat.values if isinstance(f_hat, ImageGrid) else np.asarray(f_hat, dtype=float)
    b = f0.values if isinstance(f0, ImageGrid) else np.asarray(f0, dtype=float)
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def mse(f_hat, f0) -> float:
    a, b = _pair(f_hat, f0)
    return float(np.mean((a - b) ** 2))


def psnr(f_hat, f0) -> float:
    """10 log10(max(f0)^2 / MSE); ``inf`` when the images are identical."""
    a, b = _pair(f_hat, f0)
    if not np.any(b != 0):
        raise ValidationError("ground truth is all zeros; PSNR undefined")
    peak = float(b.max())
    err = float(np.mean((a - b) ** 2))
    if err == 0:
        return math.inf
    return 10.0 * math.log10(peak * peak / err)


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x**2) / (2 * sigma**2))
    return g / g.sum()


def _local_mean(img, g):
    h = len(g) // 2
    out = correlate1d(correlate1d(img, g, axis=0, mode="constant"), g, axis=1, mode="constant")
    # valid region only: windows fully inside the image
    return out[h : img.shape[0] - h, h : img.shape[1] - h]


def ssim_map(f_hat, f0, L: Optional[float] = None) -> np.ndarray:
    a, b = _pair(f_hat, f0)
    if L is None:
        L = float(b.max() - b.min())
    if not L > 0:
        raise ValidationError(f"dynamic range L must be positive, got {L}")
    if min(a.shape) < SSIM_WINDOW:
        raise ValidationError(f"images smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window")
    c1 = (0.01 * L) ** 2
    c2 = (0.03 * L) ** 2
    c3 = c2 / 2.0
    g = gaussian_window()
    mu_a, mu_b = _local_mean(a, g), _local_mean(b, g)
    var_a = np.maximum(_local_mean(a * a, g) - mu_a * mu_a, 0.0)
    var_b = np.maximum(_local_mean(b * b, g) - mu_b * mu_b, 0.0)
    cov = _local_mean(a * b, g) - mu_a * mu_b
    sd_ab = np.sqrt(var_a * var_b)
    # a clamped (rounding-negative) variance means a flat window: no covariance either
    cov = np.where(sd_ab == 0, 0.0, cov)
    lum = (2 * mu_a * mu_b + c1) / (mu_a * mu_a + mu_b * mu_b + c1)
    con = (2 * sd_ab + c2) / (var_a + var_b + c2)
    struct = (cov + c3) / (sd_ab + c3)
    return lum * con * struct


def ssim(f_hat, f0, L: Optional[float] = None) -> float:
    """Mean SSIM over 11x11 Gaussian windows (sigma 1.5) lying fully inside the image.

    ``L`` defaults to the dynamic range of the ground truth ``f0``.
    """
    return float(np.mean(ssim_map(f_hat, f0, L)))
