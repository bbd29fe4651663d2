"""16-bit binary PGM image files with a JSON scale sidecar.

Intensities are stored as big-endian 16-bit samples scaled so the image
maximum maps to 65535; the applied scale factor, pixel pitch, and
dimensions go into ``<name>.json`` next to the ``.pgm``.  Readers divide
the raw samples by the recorded scale to recover physical intensities.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .fileio import atomic_write_bytes, write_json
from .optics import ImageGrid

MAXVAL = 65535


def sidecar_path(path) -> str:
    root, _ = os.path.splitext(os.fspath(path))
    return root + ".json"


def write_pgm(img: ImageGrid, path) -> None:
    """Write the image as binary PGM (P5, maxval 65535) plus sidecar."""
    peak = float(np.max(img.values)) if img.values.size else 0.0
    scale = MAXVAL / peak if peak > 0 else 1.0
    samples = np.round(img.values * scale).astype(">u2")
    header = f"P5\n{img.width} {img.height}\n{MAXVAL}\n".encode("ascii")
    atomic_write_bytes(path, header + samples.tobytes())
    write_json(
        sidecar_path(path),
        {"scale": scale, "pitch": img.pitch, "width": img.width, "height": img.height},
    )


def _tokenize_header(data: bytes):
    """Yield header tokens, honoring PGM '#' comments; return raster offset."""
    tokens = []
    i = 0
    while len(tokens) < 4:
        if i >= len(data):
            raise ValueError("truncated PGM header")
        c = data[i : i + 1]
        if c.isspace():
            i += 1
        elif c == b"#":
            while i < len(data) and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
        else:
            start = i
            while i < len(data) and not data[i : i + 1].isspace():
                i += 1
            tokens.append(data[start:i])
    # Exactly one whitespace byte separates the maxval from the raster.
    return tokens, i + 1


def read_pgm(path) -> ImageGrid:
    """Read a binary PGM written by write_pgm (8-bit files also accepted).

    If the sidecar is missing, scale and pitch default to 1.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    tokens, offset = _tokenize_header(data)
    if tokens[0] != b"P5":
        raise ValueError(f"{os.fspath(path)!r} is not a binary PGM (magic {tokens[0]!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise ValueError(f"malformed PGM header in {os.fspath(path)!r}") from exc
    if width < 1 or height < 1 or not (0 < maxval <= MAXVAL):
        raise ValueError(f"unsupported PGM geometry in {os.fspath(path)!r}")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    expected = width * height * dtype.itemsize
    raster = data[offset : offset + expected]
    if len(raster) != expected:
        raise ValueError(f"truncated PGM raster in {os.fspath(path)!r}")
    samples = np.frombuffer(raster, dtype=dtype).reshape(height, width)

    scale, pitch = 1.0, 1.0
    sidecar = sidecar_path(path)
    if os.path.exists(sidecar):
        with open(sidecar, "r", encoding="ascii") as fh:
            meta = json.load(fh)
        scale = float(meta.get("scale", 1.0))
        pitch = float(meta.get("pitch", 1.0))
        if scale <= 0:
            raise ValueError(f"non-positive scale in sidecar {sidecar!r}")
    return ImageGrid(samples.astype(float) / scale, pitch)
