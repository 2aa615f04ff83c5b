"""Shared builders for images, ISP configs, and on-disk scene fixtures."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from blursynth import (
    BayerPattern,
    GammaCrf,
    Image,
    IspConfig,
    SharpSequence,
    Stage,
    write_image,
)

# White-preserving (rows sum to 1), comfortably invertible.
REALISTIC_CCM = np.array(
    [
        [1.70, -0.50, -0.20],
        [-0.25, 1.45, -0.20],
        [0.05, -0.65, 1.60],
    ]
)


def realistic_isp(crf: GammaCrf | None = None) -> IspConfig:
    return IspConfig(
        wb_gains=(2.0, 1.0, 1.5),
        ccm=REALISTIC_CCM,
        crf=crf or GammaCrf(2.2),
        bayer_pattern=BayerPattern.RGGB,
    )


def constant(value, h: int = 4, w: int = 4, stage: Stage = Stage.SRGB) -> Image:
    if isinstance(value, (tuple, list, np.ndarray)):
        data = np.broadcast_to(np.asarray(value, dtype=np.float64), (h, w, 3)).copy()
    else:
        data = np.full((h, w, 3), float(value))
    return Image(data, stage)


def bayer_constant(value: float, h: int = 4, w: int = 4) -> Image:
    return Image(np.full((h, w), float(value)), Stage.BAYER_RAW)


def random_srgb(rng: np.random.Generator, h: int = 8, w: int = 8) -> Image:
    return Image(rng.random((h, w, 3)), Stage.SRGB)


def moving_dot_frames(rng: np.random.Generator, count: int = 9, h: int = 32,
                      w: int = 32, saturate: bool = True) -> list[Image]:
    """Sharp frames of a bright dot sweeping over a textured background."""
    background = 0.15 + 0.6 * rng.random((h, w, 3))
    frames = []
    for i in range(count):
        data = background.copy()
        cx = int((i + 1) * w / (count + 1))
        cy = h // 2
        yy, xx = np.mgrid[0:h, 0:w]
        dist2 = (yy - cy) ** 2 + (xx - cx) ** 2
        blob = np.exp(-dist2 / (0.02 * h * w))
        data += blob[:, :, None] * 0.9
        if saturate:
            data[cy - 1:cy + 1, max(cx - 1, 0):cx + 1, :] = 1.0
        frames.append(Image(np.clip(data, 0.0, 1.0), Stage.SRGB))
    return frames


def make_sequence(rng: np.random.Generator, count: int = 9, h: int = 32, w: int = 32,
                  scene_id: str = "scene", saturate: bool = True,
                  with_real: bool = False) -> SharpSequence:
    frames = moving_dot_frames(rng, count, h, w, saturate)
    real = None
    if with_real:
        stack = np.stack([f.data for f in frames])
        real = Image(np.clip(stack.mean(axis=0) * 1.1, 0.0, 1.0), Stage.SRGB)
    return SharpSequence(
        frames=tuple(frames),
        gt_index=count // 2,
        scene_id=scene_id,
        real_blurred=real,
    )


def write_scene_dir(root: Path, scene_id: str, frames: list[Image],
                    real_blurred: Image | None = None, gt_index: int | None = None,
                    bit_depth: int = 8) -> dict:
    """Write frame PNGs under root/scene_id and return its manifest entry."""
    scene_dir = root / scene_id
    scene_dir.mkdir(parents=True, exist_ok=True)
    names = []
    for i, frame in enumerate(frames):
        name = f"{i:03d}.png"
        write_image(frame, scene_dir / name, bit_depth)
        names.append(name)
    entry = {
        "scene_id": scene_id,
        "dir": scene_id,
        "frames": names,
        "gt_index": len(frames) // 2 if gt_index is None else gt_index,
        "exposure_blur": 0.1,
        "exposure_sharp": 0.005,
    }
    if real_blurred is not None:
        write_image(real_blurred, scene_dir / "real.png", bit_depth)
        entry["real_blurred"] = "real.png"
    return entry


def write_manifest(path: Path, entries: list[dict]) -> Path:
    path.write_text("".join(json.dumps(e) + "\n" for e in entries))
    return path


def build_fixture_dataset(root: Path, scenes: int = 3, h: int = 32, w: int = 32,
                          seed: int = 99, with_real: bool = False) -> Path:
    """Write a small multi-scene dataset and return its manifest path."""
    rng = np.random.default_rng(seed)
    entries = []
    for i in range(scenes):
        scene_id = f"scene{i:03d}"
        frames = moving_dot_frames(rng, 9, h, w, saturate=True)
        real = None
        if with_real:
            stack = np.stack([f.data for f in frames])
            real = Image(np.clip(stack.mean(axis=0) * 1.1, 0.0, 1.0), Stage.SRGB)
        entries.append(write_scene_dir(root, scene_id, frames, real_blurred=real))
    return write_manifest(root / "manifest.jsonl", entries)
