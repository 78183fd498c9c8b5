import math

import numpy as np
import pytest

from sparsetomo.core import (
    AngleSet, FrequencySupport, ImageGrid, Method, ReconConfig, Sinogram, ValidationError,
    default_detector_count, validate,
)
from sparsetomo.spectral import dft_detector_axis, is_hermitian


def test_default_config_is_valid():
    validate(ReconConfig())


@pytest.mark.parametrize(
    "kwargs, field",
    [
        ({"max_iters": 0}, "max_iters"),
        ({"stop_eps": -1.0}, "stop_eps"),
        ({"relaxation": 0.0}, "relaxation"),
        ({"gmdl_norm": "aic"}, "gmdl_norm"),
        ({"method": "sfbp", "filter_kind": "hann"}, "filter_kind"),
        ({"method": "fbp", "filter_kind": "sparse"}, "filter_kind"),
    ],
)
def test_validate_names_the_field(kwargs, field):
    with pytest.raises(ValidationError, match=field):
        validate(ReconConfig(**kwargs))


def test_resolved_filter_defaults():
    assert ReconConfig(method="fbp").resolved_filter.value == "ramlak"
    assert ReconConfig(method="fsirt").resolved_filter.value == "cosine"
    assert ReconConfig(method="sfsirt").resolved_filter.value == "sparse"
    assert ReconConfig(method="sirt").resolved_filter is None
    assert ReconConfig(method="sirt").method is Method.SIRT


def test_image_grid_invariants():
    with pytest.raises(ValidationError):
        ImageGrid(np.zeros((3, 4)))
    with pytest.raises(ValidationError):
        ImageGrid(np.array([[np.nan]]))
    with pytest.raises(ValidationError):
        ImageGrid(np.zeros((2, 2)), pixel_size=0)
    img = ImageGrid(np.ones((2, 2)))
    with pytest.raises(ValueError):
        img.values[0, 0] = 5.0


def test_angle_set_invariants():
    with pytest.raises(ValidationError):
        AngleSet(())
    with pytest.raises(ValidationError):
        AngleSet((0.0, 0.0))
    with pytest.raises(ValidationError):
        AngleSet((-90.0, 0.0))
    assert AngleSet((90.0,)).angles_deg == (90.0,)


def test_quadrature_weight():
    assert AngleSet.uniform(180).quadrature_weight() == pytest.approx(math.pi / 180)
    limited = AngleSet(tuple(float(a) for a in range(-64, 65)))
    assert limited.quadrature_weight() == pytest.approx(math.radians(1.0))


def test_sinogram_shape_must_match_angles():
    with pytest.raises(ValidationError):
        Sinogram(np.zeros((4, 3)), AngleSet((0.0, 1.0)))


def test_default_detector_count_is_even_and_covers_diagonal():
    for n in (1, 16, 64, 127, 128):
        nd = default_detector_count(n)
        assert nd % 2 == 0 and nd >= math.sqrt(2) * n


def test_frequency_support_mask(rng):
    sup = FrequencySupport(frozenset({0, 3}), 1.0, rng.random(5))
    assert sup.mask().tolist() == [True, False, False, True, False]
    with pytest.raises(ValidationError):
        FrequencySupport(frozenset(), -1.0, np.zeros(2))


def test_spectral_sinogram_of_real_input_is_hermitian(rng):
    for nd in (1, 7, 32, 91):
        sino = Sinogram(rng.normal(size=(nd, 3)), AngleSet((-10.0, 0.0, 10.0)))
        assert is_hermitian(dft_detector_axis(sino), rtol=1e-9)
