"""Batch dataset synthesis: manifests, scene loading, parallel runs.

A dataset manifest is line-oriented JSON: one scene exposure per line,
naming the sequence directory, its ordered frame files, the ground-truth
index, exposure times, an optional real blurred reference, and an
optional split tag. The same schema covers reference-paired captures
(9 frames plus a real blurred image) and plain high-speed sources
(N frames, no reference).

Each scene is an independent task keyed by (seed, scene id), so output
trees are byte-identical for any worker count. Scene outputs are staged
in a temporary directory and renamed into place, so partially written
scenes never appear under final names.
"""

from __future__ import annotations

import json
import os
import shutil
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from multiprocessing import get_context
from pathlib import Path
from typing import Optional

from . import raster
from .blur import SharpSequence
from .color import IspConfig
from .errors import BlurSynthError, ManifestError
from .image import Image, Stage
from .pipeline import PipelineConfig, config_to_dict, synthesize

_SPLITS = ("train", "val", "test")


@dataclass(frozen=True)
class SceneRecord:
    scene_id: str
    directory: Path
    frames: tuple[str, ...]
    gt_index: int
    exposure_blur: float = 0.1
    exposure_sharp: float = 0.005
    real_blurred: Optional[str] = None
    split: Optional[str] = None

    def frame_paths(self) -> tuple[Path, ...]:
        return tuple(self.directory / f for f in self.frames)

    def real_blurred_path(self) -> Optional[Path]:
        return None if self.real_blurred is None else self.directory / self.real_blurred


@dataclass(frozen=True)
class DatasetManifest:
    scenes: tuple[SceneRecord, ...]
    root: Path


def _parse_scene(entry: dict, root: Path, line_no: int, problems: list[str]) -> Optional[SceneRecord]:
    if not isinstance(entry, dict):
        problems.append(f"line {line_no}: expected a JSON object")
        return None
    missing_keys = [k for k in ("scene_id", "frames") if k not in entry]
    if missing_keys:
        problems.append(f"line {line_no}: missing keys {missing_keys}")
        return None
    frames = entry["frames"]
    if not isinstance(frames, list) or not frames or not all(isinstance(f, str) for f in frames):
        problems.append(f"line {line_no}: 'frames' must be a non-empty list of file names")
        return None
    gt_index = int(entry.get("gt_index", len(frames) // 2))
    if not 0 <= gt_index < len(frames):
        problems.append(
            f"line {line_no}: gt_index {gt_index} out of range for {len(frames)} frames"
        )
        return None
    split = entry.get("split")
    if split is not None and split not in _SPLITS:
        problems.append(f"line {line_no}: split must be one of {_SPLITS}, got {split!r}")
        return None
    directory = root / entry.get("dir", ".")
    return SceneRecord(
        scene_id=str(entry["scene_id"]),
        directory=directory,
        frames=tuple(frames),
        gt_index=gt_index,
        exposure_blur=float(entry.get("exposure_blur", 0.1)),
        exposure_sharp=float(entry.get("exposure_sharp", 0.005)),
        real_blurred=entry.get("real_blurred"),
        split=split,
    )


def load_manifest(path: str | Path) -> DatasetManifest:
    """Parse and validate a JSON-lines dataset manifest.

    Validation is exhaustive: every parse problem, duplicate id, and
    missing referenced file is collected before raising, not just the
    first one. Blank lines and '#' comment lines are ignored.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    root = path.parent
    problems: list[str] = []
    scenes: list[SceneRecord] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            entry = json.loads(stripped)
        except json.JSONDecodeError as exc:
            problems.append(f"line {line_no}: invalid JSON ({exc.msg})")
            continue
        record = _parse_scene(entry, root, line_no, problems)
        if record is not None:
            scenes.append(record)

    seen: dict[str, int] = {}
    for record in scenes:
        seen[record.scene_id] = seen.get(record.scene_id, 0) + 1
    duplicates = sorted(sid for sid, n in seen.items() if n > 1)
    if duplicates:
        problems.append("duplicate scene ids: " + ", ".join(duplicates))

    missing: list[str] = []
    for record in scenes:
        for p in record.frame_paths():
            if not p.is_file():
                missing.append(str(p))
        real = record.real_blurred_path()
        if real is not None and not real.is_file():
            missing.append(str(real))
    if missing:
        problems.append("missing files: " + ", ".join(missing))

    if problems:
        raise ManifestError(f"manifest {path} is invalid:\n  " + "\n  ".join(problems))
    return DatasetManifest(scenes=tuple(scenes), root=root)


def load_scene(record: SceneRecord) -> SharpSequence:
    """Read a scene's frames (and optional reference) into a SharpSequence."""
    frames = tuple(raster.load_image(p, Stage.SRGB) for p in record.frame_paths())
    real_path = record.real_blurred_path()
    real = raster.load_image(real_path, Stage.SRGB) if real_path else None
    return SharpSequence(
        frames=frames,
        gt_index=record.gt_index,
        exposure_blur=record.exposure_blur,
        exposure_sharp=record.exposure_sharp,
        scene_id=record.scene_id,
        real_blurred=real,
    )


@dataclass(frozen=True)
class OutputRecord:
    """Paths (relative to the output root) of one synthesized pair."""

    scene_id: str
    blurred: str
    gt: str
    mask: str
    provenance: str
    checksum: str


@dataclass(frozen=True)
class SceneFailure:
    scene_id: str
    error: str


@dataclass(frozen=True)
class BatchResult:
    records: tuple[OutputRecord, ...]
    failures: tuple[SceneFailure, ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def _process_scene(record: SceneRecord, cfg: PipelineConfig,
                   isp: Optional[IspConfig], out_root: str,
                   bit_depth: int) -> OutputRecord:
    seq = load_scene(record)
    output = synthesize(seq, cfg, isp)

    rel = {name: f"{record.scene_id}/{name}.png" for name in ("blurred", "gt", "mask")}
    scene_dir = Path(out_root) / record.scene_id
    staging = scene_dir.with_name(f"{scene_dir.name}.staging-{os.getpid()}")
    if staging.exists():
        shutil.rmtree(staging)
    staging.mkdir(parents=True)
    try:
        checksum = raster.write_image(output.blurred, staging / "blurred.png", bit_depth)
        raster.write_image(output.gt_sharp, staging / "gt.png", bit_depth)
        mask_img = Image(output.mask.data, Stage.SRGB)
        raster.write_image(mask_img, staging / "mask.png", bit_depth)
        sidecar = output.provenance.to_dict()
        sidecar.update(
            rel,
            checksum=checksum,
            bit_depth=bit_depth,
            config=config_to_dict(cfg),
        )
        payload = json.dumps(sidecar, sort_keys=True, indent=2).encode("utf-8")
        (staging / "provenance.json").write_bytes(payload)
        if scene_dir.exists():
            shutil.rmtree(scene_dir)
        os.replace(staging, scene_dir)
    finally:
        if staging.exists():
            shutil.rmtree(staging)
    return OutputRecord(
        scene_id=record.scene_id,
        blurred=rel["blurred"],
        gt=rel["gt"],
        mask=rel["mask"],
        provenance=f"{record.scene_id}/provenance.json",
        checksum=checksum,
    )


def run_batch(manifest: DatasetManifest, cfg: PipelineConfig,
              isp: Optional[IspConfig], out_dir: str | Path,
              workers: int = 1, bit_depth: int = 16) -> BatchResult:
    """Synthesize every scene in the manifest into out_dir.

    Per-scene failures are collected and the batch continues; outputs are
    a pure function of (manifest, config, seed) regardless of workers.
    Multi-worker runs use the spawn start method, so the calling program
    needs an importable main module (scripts and the CLI qualify).
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    probe = out_dir / f".write-probe-{os.getpid()}"
    probe.write_bytes(b"")  # surfaces unwritable out_dir before any synthesis
    probe.unlink()

    records: list[OutputRecord] = []
    failures: list[SceneFailure] = []
    if workers == 1 or len(manifest.scenes) <= 1:
        for record in manifest.scenes:
            try:
                records.append(_process_scene(record, cfg, isp, str(out_dir), bit_depth))
            except (BlurSynthError, OSError) as exc:
                failures.append(SceneFailure(record.scene_id, str(exc)))
    else:
        with ProcessPoolExecutor(max_workers=workers, mp_context=get_context("spawn")) as pool:
            futures = {
                record.scene_id: pool.submit(
                    _process_scene, record, cfg, isp, str(out_dir), bit_depth
                )
                for record in manifest.scenes
            }
            for record in manifest.scenes:
                try:
                    records.append(futures[record.scene_id].result())
                except (BlurSynthError, OSError) as exc:
                    failures.append(SceneFailure(record.scene_id, str(exc)))
    return BatchResult(records=tuple(records), failures=tuple(failures))


def write_image(img: Image, path: str | Path, bit_depth: int = 16) -> str:
    """Quantize to 8 or 16 bits and write a lossless PNG; returns sha256."""
    return raster.write_image(img, path, bit_depth)
