"""Container files, CSV exports and PGM debug dumps.

Container layout (all little-endian)::

    b"TOMOARR1"            8-byte magic
    uint32                 header length in bytes
    header                 UTF-8 JSON object, sorted keys, no whitespace
    float32[...]           payload, row-major (images: rows; sinograms: detectors x angles)

Angles are stored as integer millidegrees so headers are bit-exact.
"""
from __future__ import annotations

import csv
import json
import math
import os
import struct
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import AngleSet, FrequencySupport, ImageGrid, Sinogram, ValidationError

MAGIC = b"TOMOARR1"
CREATOR = "sparsetomo"


class ContainerError(ValueError):
    pass


def _header_for(obj, seed, extra) -> dict:
    if isinstance(obj, ImageGrid):
        head = {"kind": "image", "dims": [obj.size_n, obj.size_n], "pixel_size": obj.pixel_size}
    elif isinstance(obj, Sinogram):
        head = {
            "kind": "sinogram",
            "dims": [obj.n_detectors, obj.n_angles],
            "detector_spacing": obj.detector_spacing,
            "angles_mdeg": [int(round(a * 1000)) for a in obj.angles.angles_deg],
        }
    else:
        raise ContainerError(f"cannot store {type(obj).__name__}")
    head["creator"] = CREATOR
    head["seed"] = seed
    if extra:
        head.update(extra)
    return head


def encode_container(obj, seed: Optional[int] = None, extra: Optional[dict] = None) -> bytes:
    with np.errstate(over="ignore"):
        payload = np.asarray(obj.values, dtype="<f4")
    if not np.all(np.isfinite(payload)):
        raise ContainerError("values are not finite (or overflow float32)")
    head = json.dumps(_header_for(obj, seed, extra), sort_keys=True, separators=(",", ":")).encode()
    return MAGIC + struct.pack("<I", len(head)) + head + payload.tobytes(order="C")


def write_container(obj, path, seed: Optional[int] = None, extra: Optional[dict] = None) -> None:
    if not path:
        raise ContainerError("empty output path")
    data = encode_container(obj, seed, extra)
    with open(path, "wb") as fh:
        fh.write(data)


def decode_container(data: bytes):
    """Parse container bytes. Returns ``(obj, header)``."""
    if len(data) < 12 or data[:8] != MAGIC:
        raise ContainerError("bad magic: not a TOMOARR1 container")
    (hlen,) = struct.unpack("<I", data[8:12])
    if 12 + hlen > len(data):
        raise ContainerError("truncated header")
    try:
        head = json.loads(data[12 : 12 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ContainerError(f"corrupt header: {exc}") from None
    dims = head.get("dims")
    if not (isinstance(dims, list) and len(dims) == 2 and all(isinstance(d, int) and d > 0 for d in dims)):
        raise ContainerError("header dims must be two positive integers")
    body = data[12 + hlen :]
    expected = dims[0] * dims[1] * 4
    if len(body) != expected:
        kind = "truncated" if len(body) < expected else "trailing bytes after"
        raise ContainerError(f"{kind} payload: expected {expected} bytes, got {len(body)}")
    vals = np.frombuffer(body, dtype="<f4").reshape(dims).astype(np.float64)
    if not np.all(np.isfinite(vals)):
        raise ContainerError("payload contains non-finite values")
    try:
        if head.get("kind") == "image":
            if dims[0] != dims[1]:
                raise ContainerError("image dims must be square")
            obj = ImageGrid(vals, head.get("pixel_size", 1.0))
        elif head.get("kind") == "sinogram":
            mdeg = head.get("angles_mdeg", [])
            if len(mdeg) != dims[1]:
                raise ContainerError("angle list length does not match sinogram width")
            angles = AngleSet(tuple(m / 1000.0 for m in mdeg))
            obj = Sinogram(vals, angles, head.get("detector_spacing", 1.0))
        else:
            raise ContainerError(f"unknown container kind {head.get('kind')!r}")
    except ValidationError as exc:
        raise ContainerError(str(exc)) from None
    return obj, head


def read_container(path, with_header: bool = False):
    with open(path, "rb") as fh:
        obj, head = decode_container(fh.read())
    return (obj, head) if with_header else obj


def write_pgm(values: np.ndarray, path) -> None:
    """16-bit binary PGM, linearly scaled from min..max."""
    v = np.asarray(values, dtype=float)
    lo, hi = float(v.min()), float(v.max())
    scale = 65535.0 / (hi - lo) if hi > lo else 0.0
    q = np.round((v - lo) * scale).astype(">u2")
    with open(path, "wb") as fh:
        fh.write(f"P5\n{v.shape[1]} {v.shape[0]}\n65535\n".encode("ascii"))
        fh.write(q.tobytes())


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return repr(x)
    return str(x)


def write_csv(path_or_file, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    own = isinstance(path_or_file, (str, os.PathLike))
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    finally:
        if own:
            fh.close()


def write_trace_csv(path, trace) -> None:
    write_csv(path, ("k", "delta", "psnr", "wall_ms"), ((r.k, r.delta, r.psnr, r.wall_ms) for r in trace))


def support_rows(supports: Sequence[FrequencySupport], freqs: np.ndarray):
    for it, sup in enumerate(supports):
        mask = sup.mask()
        for b in range(sup.n_freq):
            yield (it, b, float(freqs[b]), float(sup.energies[b]), int(mask[b]), sup.lam)


def write_support_csv(path, supports: Sequence[FrequencySupport], freqs: np.ndarray) -> None:
    write_csv(path, ("iteration", "bin", "freq", "energy", "selected", "lambda"), support_rows(supports, freqs))


def write_gmdl_csv(path, supports: Sequence[FrequencySupport]) -> None:
    rows = (
        (it, k + 1, float(s), int(k + 1 == sup.k_star))
        for it, sup in enumerate(supports)
        for k, s in enumerate(sup.gmdl_scores)
    )
    write_csv(path, ("iteration", "k", "score", "selected"), rows)
