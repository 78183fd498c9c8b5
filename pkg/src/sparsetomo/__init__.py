"""Sparse filtered backprojection (sFBP) and SIRT variants for parallel-beam tomography."""
from .core import (
    AngleSet,
    FilterName,
    FrequencySupport,
    ImageGrid,
    Method,
    ReconConfig,
    Sinogram,
    SpectralSinogram,
    ValidationError,
    validate,
)
from .bench import reconstruct
from .iterative import DivergenceError, ReconReport, run_iterative, sirt_step
from .metrics import mse, psnr, ssim
from .projection import ProjectionGeometry, backproject, radon_forward
from .simulation import NoiseSpec, PhantomKind, add_poisson_noise, make_phantom, make_scenario
from .sparse_filter import select_support, sfbp_reconstruct, threshold_support
from .spectral import FilterKind, dft_detector_axis, fbp_reconstruct, idft_detector_axis

__version__ = "0.1.0"

__all__ = [
    "AngleSet", "DivergenceError", "FilterKind", "FilterName", "FrequencySupport", "ImageGrid", "Method",
    "NoiseSpec", "PhantomKind", "ProjectionGeometry", "ReconConfig", "ReconReport", "Sinogram",
    "SpectralSinogram", "ValidationError", "add_poisson_noise", "backproject", "dft_detector_axis",
    "fbp_reconstruct", "idft_detector_axis", "make_phantom", "make_scenario", "mse", "psnr",
    "radon_forward", "reconstruct", "run_iterative", "select_support", "sfbp_reconstruct", "sirt_step",
    "ssim", "threshold_support", "validate",
]
