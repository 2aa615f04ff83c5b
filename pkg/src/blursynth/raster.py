"""Lossless 8/16-bit PNG input and output with atomic writes."""

from __future__ import annotations

import hashlib
import os
from pathlib import Path

import cv2
import numpy as np

from .errors import ConfigError, DomainError, RasterError
from .image import Image, Stage

_MAX_VALUE = {8: 255, 16: 65535}
_DTYPE = {8: np.uint8, 16: np.uint16}


def quantize(data: np.ndarray, bit_depth: int) -> np.ndarray:
    """Map [0, 1] floats to integer codes: round(v * (2^d - 1))."""
    if bit_depth not in _MAX_VALUE:
        raise ConfigError(f"bit_depth must be 8 or 16, got {bit_depth}")
    return np.rint(data * _MAX_VALUE[bit_depth]).astype(_DTYPE[bit_depth])


def encode_png(data: np.ndarray, bit_depth: int) -> bytes:
    """Quantize and encode an RGB (H, W, 3) or gray (H, W) array as PNG."""
    codes = quantize(data, bit_depth)
    if codes.ndim == 3:
        codes = codes[:, :, ::-1]  # PNG encoder wants BGR order
    ok, buf = cv2.imencode(".png", codes)
    if not ok:
        raise RasterError("PNG encoding failed")
    return buf.tobytes()


def atomic_write_bytes(payload: bytes, path: Path) -> None:
    tmp = path.with_name(f"{path.name}.tmp-{os.getpid()}")
    tmp.write_bytes(payload)
    os.replace(tmp, path)


def write_image(img: Image, path: str | Path, bit_depth: int = 16) -> str:
    """Write a [0, 1] image losslessly; returns the sha256 of the file bytes.

    The file appears under its final name only once fully written.
    """
    lo = float(img.data.min())
    hi = float(img.data.max())
    if lo < 0.0 or hi > 1.0:
        raise DomainError(f"samples must lie in [0, 1] before writing, got [{lo}, {hi}]")
    payload = encode_png(img.data, bit_depth)
    path = Path(path)
    atomic_write_bytes(payload, path)
    return hashlib.sha256(payload).hexdigest()


def read_array(path: str | Path) -> tuple[np.ndarray, int]:
    """Read a PNG back to floats in [0, 1]; returns (array, bit depth)."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image file: {path}")
    raw = np.fromfile(path, dtype=np.uint8)
    decoded = cv2.imdecode(raw, cv2.IMREAD_UNCHANGED)
    if decoded is None:
        raise RasterError(f"cannot decode image file: {path}")
    if decoded.dtype == np.uint8:
        depth = 8
    elif decoded.dtype == np.uint16:
        depth = 16
    else:
        raise RasterError(f"unsupported sample type {decoded.dtype} in {path}")
    if decoded.ndim == 3:
        if decoded.shape[2] != 3:
            raise RasterError(f"expected 1 or 3 channels, got {decoded.shape[2]} in {path}")
        decoded = decoded[:, :, ::-1]
    return decoded.astype(np.float64) / _MAX_VALUE[depth], depth


def load_image(path: str | Path, stage: Stage) -> Image:
    data, _ = read_array(path)
    return Image(data, stage)
