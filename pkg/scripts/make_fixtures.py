#!/usr/bin/env python3
"""Generate a small synthetic dataset of sharp sequences for pipeline demos.

Each scene is a textured background with a bright saturated streak sweeping
across the frame, which is enough structure to exercise interpolation,
saturation masks, and the noise branches. With --with-reference a stand-in
"real blurred" image (frame average plus a boosted streak) is written so the
oracle presets can run; it is a placeholder for a co-captured real image,
not a measurement.

Example:
    python3 scripts/make_fixtures.py --out demo_data --scenes 4 --size 256
    blursynth synth --manifest demo_data/manifest.jsonl --preset full_ours --out demo_out
"""

import argparse
import json
from pathlib import Path

import numpy as np

from blursynth import Image, Stage, write_image


def scene_frames(rng: np.random.Generator, count: int, size: int) -> list[Image]:
    background = 0.1 + 0.55 * rng.random((size, size, 3))
    yy, xx = np.mgrid[0:size, 0:size]
    frames = []
    y0 = size * (0.3 + 0.4 * rng.random())
    for i in range(count):
        data = background.copy()
        cx = size * (0.15 + 0.7 * i / max(count - 1, 1))
        dist2 = (yy - y0) ** 2 + (xx - cx) ** 2
        glow = np.exp(-dist2 / (0.003 * size * size))
        data += glow[:, :, None] * np.array([1.0, 0.9, 0.7])
        core = dist2 < (0.01 * size) ** 2 + 4
        data[core] = 1.0
        frames.append(Image(np.clip(data, 0.0, 1.0), Stage.SRGB))
    return frames


def pseudo_reference(frames: list[Image]) -> Image:
    stack = np.stack([f.data for f in frames])
    mean = stack.mean(axis=0)
    streak = (stack >= 1.0).mean(axis=0)
    return Image(np.clip(mean + 0.8 * streak, 0.0, 1.0), Stage.SRGB)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", required=True, help="dataset directory to create")
    parser.add_argument("--scenes", type=int, default=3)
    parser.add_argument("--frames", type=int, default=9)
    parser.add_argument("--size", type=int, default=256)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--with-reference", action="store_true",
                        help="also write a stand-in real blurred reference per scene")
    parser.add_argument("--split", choices=("train", "val", "test"), default=None)
    args = parser.parse_args()

    root = Path(args.out)
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    entries = []
    for index in range(args.scenes):
        scene_id = f"scene{index:03d}"
        scene_dir = root / scene_id
        scene_dir.mkdir(exist_ok=True)
        frames = scene_frames(rng, args.frames, args.size)
        names = []
        for i, frame in enumerate(frames):
            name = f"{i:04d}.png"
            write_image(frame, scene_dir / name, 8)
            names.append(name)
        entry = {
            "scene_id": scene_id,
            "dir": scene_id,
            "frames": names,
            "gt_index": args.frames // 2,
            "exposure_blur": 0.1,
            "exposure_sharp": 0.005,
        }
        if args.with_reference:
            write_image(pseudo_reference(frames), scene_dir / "real.png", 8)
            entry["real_blurred"] = "real.png"
        if args.split:
            entry["split"] = args.split
        entries.append(entry)
        print(f"wrote {scene_id}: {args.frames} frames at {args.size}x{args.size}")

    manifest = root / "manifest.jsonl"
    manifest.write_text("".join(json.dumps(e) + "\n" for e in entries))
    print(f"manifest: {manifest}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
