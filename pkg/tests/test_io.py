import struct

import numpy as np
import pytest

from sparsetomo import io
from sparsetomo.core import AngleSet, ImageGrid, Sinogram


def _image(rng):
    return ImageGrid(rng.normal(size=(5, 5)), pixel_size=0.5)


def test_image_round_trip(rng, tmp_path):
    img = _image(rng)
    path = tmp_path / "a.tomo"
    io.write_container(img, path, seed=4)
    back, head = io.read_container(path, with_header=True)
    assert np.array_equal(back.values, img.values.astype(np.float32).astype(float))
    assert back.pixel_size == 0.5 and head["seed"] == 4 and head["creator"] == "sparsetomo"


def test_round_trip_is_bit_identical_after_quantization(rng, tmp_path):
    img = ImageGrid(rng.normal(size=(4, 4)).astype(np.float32).astype(float))
    io.write_container(img, tmp_path / "a")
    assert io.read_container(tmp_path / "a") == img
    sino = Sinogram(np.ones((3, 2), np.float32), AngleSet((-12.345, 60.0)), 2.0)
    io.write_container(sino, tmp_path / "s")
    assert io.read_container(tmp_path / "s") == sino


def test_deterministic_bytes(rng):
    img = _image(rng)
    assert io.encode_container(img, 1) == io.encode_container(img, 1)


def test_header_layout(rng):
    data = io.encode_container(_image(rng))
    assert data[:8] == b"TOMOARR1"
    (hlen,) = struct.unpack("<I", data[8:12])
    assert len(data) == 12 + hlen + 25 * 4


def test_rejects_bad_inputs(rng, tmp_path):
    data = io.encode_container(_image(rng))
    with pytest.raises(io.ContainerError, match="magic"):
        io.decode_container(b"XXXXXXXX" + data[8:])
    with pytest.raises(io.ContainerError, match="truncated"):
        io.decode_container(data[:-3])
    with pytest.raises(io.ContainerError, match="trailing"):
        io.decode_container(data + b"\0\0\0\0")
    nan = bytearray(data)
    nan[-4:] = struct.pack("<f", float("nan"))
    with pytest.raises(io.ContainerError, match="non-finite"):
        io.decode_container(bytes(nan))
    with pytest.raises(io.ContainerError):
        io.write_container(_image(rng), "")
    with pytest.raises(io.ContainerError):
        io.encode_container(ImageGrid(np.full((2, 2), 1e300)))


def test_csv_lf_endings(tmp_path):
    path = tmp_path / "x.csv"
    io.write_csv(path, ["a", "b"], [[1, float("inf")], [0.5, None]])
    assert path.read_bytes() == b"a,b\n1,inf\n0.5,\n"


def test_pgm_dump(tmp_path):
    io.write_pgm(np.array([[0.0, 1.0], [0.5, 1.0]]), tmp_path / "p.pgm")
    data = (tmp_path / "p.pgm").read_bytes()
    assert data.startswith(b"P5\n2 2\n65535\n")
    assert np.frombuffer(data[-8:], ">u2").tolist() == [0, 65535, 32768, 65535]
