"""Temporal blur formation: frame interpolation, averaging, saturation.

A blurred exposure is simulated by averaging a dense sequence of sharp
frames in linear space. Saturated highlights, which plain averaging washes
out, are reinjected either by boosting a saturation mask or by copying
pixels from a co-captured real blurred reference.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, DomainError, ManifestError, ShapeError
from .image import Image, Stage, require_same_shape, require_stage
from . import raster


@dataclass(frozen=True, eq=False)
class SharpSequence:
    """Ordered sharp sRGB frames covering one blurred exposure window.

    gt_index points at the frame whose exposure midpoint matches the
    blurred exposure midpoint (the center frame). real_blurred optionally
    carries a co-captured real blurred image for reference-guided
    saturation.
    """

    frames: tuple[Image, ...]
    gt_index: int
    exposure_blur: float = 0.1
    exposure_sharp: float = 0.005
    scene_id: str = "scene"
    real_blurred: Image | None = None

    def __post_init__(self) -> None:
        frames = tuple(self.frames)
        if len(frames) < 2:
            raise ShapeError(f"a sequence needs at least 2 frames, got {len(frames)}")
        for f in frames:
            require_stage(f, Stage.SRGB)
            require_same_shape(f, frames[0])
        if not 0 <= self.gt_index < len(frames):
            raise ConfigError(
                f"gt_index {self.gt_index} out of range for {len(frames)} frames"
            )
        if self.real_blurred is not None:
            require_stage(self.real_blurred, Stage.SRGB)
            require_same_shape(self.real_blurred, frames[0])
        object.__setattr__(self, "frames", frames)

    def __len__(self) -> int:
        return len(self.frames)


@dataclass(frozen=True, eq=False)
class SaturationMask:
    """Per-pixel-per-channel fraction of frames saturated at that site."""

    data: np.ndarray
    frame_count: int

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise DomainError("mask values must lie in [0, 1]")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)


Interpolator = Callable[[Image, Image], Image]


def interpolate_midpoint(a: Image, b: Image) -> Image:
    """Per-sample midpoint of two frames, the baseline interpolator.

    A learned interpolator can be substituted through expand_sequence, or
    bypassed entirely by loading externally interpolated frames.
    """
    if a.stage is not b.stage:
        raise ShapeError(f"stage mismatch: {a.stage.value} vs {b.stage.value}")
    require_same_shape(a, b)
    return Image(0.5 * (a.data + b.data), a.stage)


def expand_sequence(seq: SharpSequence, rounds: int,
                    interpolator: Interpolator = interpolate_midpoint) -> SharpSequence:
    """Insert one interpolated frame per adjacent pair, `rounds` times.

    Each round maps n frames to 2n - 1; originals keep their values and
    land at even positions, so gt_index is remapped accordingly.
    """
    if rounds < 0:
        raise ConfigError(f"rounds must be >= 0, got {rounds}")
    if rounds == 0:
        return seq
    frames = list(seq.frames)
    for _ in range(rounds):
        expanded: list[Image] = [frames[0]]
        for left, right in zip(frames, frames[1:]):
            expanded.append(interpolator(left, right))
            expanded.append(right)
        frames = expanded
    return replace(seq, frames=tuple(frames), gt_index=seq.gt_index * (2 ** rounds))


def load_external_frames(directory: str | Path, manifest: str | Path) -> SharpSequence:
    """Build a sequence from a directory of frames listed in a JSON manifest.

    The manifest names ordered frame files (relative to the directory),
    the ground-truth index, exposure times, and an optional real blurred
    reference. This is the ingestion slot for frames produced by an
    external (e.g. learned) interpolator.
    """
    directory = Path(directory)
    manifest_path = Path(manifest)
    if not manifest_path.is_absolute():
        manifest_path = directory / manifest_path
    try:
        entry = json.loads(manifest_path.read_text())
    except FileNotFoundError as exc:
        raise ManifestError(f"manifest not found: {manifest_path}") from exc
    except json.JSONDecodeError as exc:
        raise ManifestError(f"cannot parse manifest {manifest_path}: {exc}") from exc
    if not isinstance(entry, dict) or "frames" not in entry:
        raise ManifestError(f"manifest {manifest_path} needs a 'frames' list")

    names = list(entry["frames"])
    real_name = entry.get("real_blurred")
    paths = [directory / n for n in names]
    if real_name is not None:
        paths.append(directory / real_name)
    missing = [str(p) for p in paths if not p.is_file()]
    if missing:
        raise ManifestError("missing frame files: " + ", ".join(missing))

    frames = tuple(raster.load_image(directory / n, Stage.SRGB) for n in names)
    real = raster.load_image(directory / real_name, Stage.SRGB) if real_name else None
    return SharpSequence(
        frames=frames,
        gt_index=int(entry.get("gt_index", len(frames) // 2)),
        exposure_blur=float(entry.get("exposure_blur", 0.1)),
        exposure_sharp=float(entry.get("exposure_sharp", 0.005)),
        scene_id=str(entry.get("scene_id", directory.name)),
        real_blurred=real,
    )


def average_frames(frames: Sequence[Image]) -> Image:
    """Arithmetic per-sample mean of linear frames: the synthetic blur."""
    if len(frames) == 0:
        raise ShapeError("cannot average an empty frame list")
    for f in frames:
        require_stage(f, Stage.LINEAR_SRGB)
        require_same_shape(f, frames[0])
    acc = np.zeros_like(frames[0].data)
    for f in frames:
        acc += f.data
    return Image(acc / len(frames), Stage.LINEAR_SRGB)


def saturation_mask(frames: Sequence[Image], threshold: float = 1.0) -> SaturationMask:
    """Fraction of frames with samples at or above the saturation ceiling.

    Each frame contributes a binary mask (sample >= threshold); the output
    is their mean, so values are k/N for k saturated frames out of N.
    """
    if len(frames) == 0:
        raise ShapeError("cannot build a mask from an empty frame list")
    if not 0.0 < threshold <= 1.0:
        raise ConfigError(f"threshold must lie in (0, 1], got {threshold}")
    for f in frames:
        require_same_shape(f, frames[0])
    acc = np.zeros_like(frames[0].data)
    for f in frames:
        acc += f.data >= threshold
    return SaturationMask(acc / len(frames), frame_count=len(frames))


def apply_saturation(blurred: Image, mask: SaturationMask, alpha: float) -> Image:
    """Boost masked sites by alpha times the mask, then clip to [0, 1]."""
    if alpha < 0:
        raise ConfigError(f"alpha must be >= 0, got {alpha}")
    if blurred.data.shape != mask.data.shape:
        raise ShapeError(
            f"mask shape {mask.data.shape} does not match image {blurred.data.shape}"
        )
    return Image(np.clip(blurred.data + alpha * mask.data, 0.0, 1.0), blurred.stage)


def apply_oracle_saturation(blurred: Image, reference: Image, mask: SaturationMask) -> Image:
    """Copy reference pixels wherever the mask is nonzero.

    The reference is a co-captured real blurred image in the same stage;
    this is the upper-bound variant for saturation synthesis.
    """
    if reference is None:
        raise ConfigError("oracle saturation needs a real blurred reference image")
    if blurred.stage is not reference.stage:
        raise ShapeError(
            f"stage mismatch: {blurred.stage.value} vs {reference.stage.value}"
        )
    require_same_shape(blurred, reference)
    if blurred.data.shape != mask.data.shape:
        raise ShapeError(
            f"mask shape {mask.data.shape} does not match image {blurred.data.shape}"
        )
    return Image(np.where(mask.data > 0, reference.data, blurred.data), blurred.stage)
