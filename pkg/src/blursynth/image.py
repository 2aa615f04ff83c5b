"""Stage-tagged planar float images.

Every image in the pipeline is a float64 array tagged with the color-space
stage it currently lives in. Operations check the tag so that stages cannot
be composed out of order (encoding an already-encoded image, mosaicing an
sRGB image, and so on). Values are nominally in [0, 1] but intermediate
stages may exceed 1 before the single clipping point of the forward ISP.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, ShapeError, StageError


class Stage(Enum):
    SRGB = "srgb"
    LINEAR_SRGB = "linear_srgb"
    CAMERA_RGB = "camera_rgb"
    BAYER_RAW = "bayer_raw"


@dataclass(frozen=True, eq=False)
class Image:
    """Immutable image value: float64 samples plus a color-space stage.

    RGB stages use shape (H, W, 3); the Bayer stage is a single-channel
    (H, W) mosaic. Data is copied on construction and marked read-only, so
    images are safe to share between threads and processes.
    """

    data: np.ndarray
    stage: Stage

    def __post_init__(self) -> None:
        arr = np.array(self.data, dtype=np.float64)
        if self.stage is Stage.BAYER_RAW:
            if arr.ndim != 2:
                raise ShapeError(
                    f"Bayer images are single-channel 2-D arrays, got shape {arr.shape}"
                )
        else:
            if arr.ndim != 3 or arr.shape[2] != 3:
                raise StageError(
                    f"{self.stage.value} images need shape (H, W, 3), got {arr.shape}"
                )
        if arr.size == 0:
            raise ShapeError("image has no samples")
        if not np.isfinite(arr).all():
            raise DomainError("image contains NaN or Inf samples")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.data.ndim == 2 else self.data.shape[2]

    def __repr__(self) -> str:
        return f"Image({self.width}x{self.height}x{self.channels}, {self.stage.value})"


def require_stage(img: Image, *stages: Stage) -> None:
    if img.stage not in stages:
        wanted = " or ".join(s.value for s in stages)
        raise StageError(f"expected {wanted} image, got {img.stage.value}")


def require_same_shape(a: Image, b: Image) -> None:
    if a.data.shape != b.data.shape:
        raise ShapeError(f"shape mismatch: {a.data.shape} vs {b.data.shape}")


def require_even_dims(img: Image) -> None:
    if img.height % 2 or img.width % 2:
        raise ShapeError(
            f"Bayer operations need even dimensions, got {img.width}x{img.height}"
        )
