"""Command-line interface: synth, calibrate, and presets subcommands."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import yaml

from . import raster
from .color import load_isp_config
from .dataset import load_manifest, run_batch
from .errors import BlurSynthError
from .image import Stage
from .noise import calibrate_beta1, calibrate_beta2
from .pipeline import (
    PRESET_NAMES,
    config_to_dict,
    load_pipeline_config,
    preset,
    preset_description,
    with_seed,
)

WORKERS_ENV = "BLURSYNTH_WORKERS"


def _default_workers() -> int:
    value = os.environ.get(WORKERS_ENV)
    if value is None:
        return 1
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blursynth",
        description="Synthesize realistic motion-blurred images from sharp frame sequences.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="run a pipeline over a dataset manifest")
    synth.add_argument("--manifest", required=True, help="JSON-lines dataset manifest")
    group = synth.add_mutually_exclusive_group(required=True)
    group.add_argument("--preset", choices=PRESET_NAMES, help="named pipeline variant")
    group.add_argument("--config", help="pipeline config YAML file")
    synth.add_argument("--isp-config", help="ISP config YAML (overrides the preset's ISP)")
    synth.add_argument("--out", required=True, help="output directory")
    synth.add_argument("--workers", type=int, default=_default_workers(),
                       help=f"parallel scene workers (default ${WORKERS_ENV} or 1)")
    synth.add_argument("--seed", type=int, default=None, help="global seed override")
    synth.add_argument("--bit-depth", type=int, choices=(8, 16), default=16)

    cal = sub.add_parser("calibrate", help="estimate noise parameters from RAW captures")
    cal.add_argument("--flat-dir", help="directory of flat-field RAW PNGs (for beta1)")
    cal.add_argument("--dark-dir", help="directory of dark-frame RAW PNGs (for beta2)")

    pre = sub.add_parser("presets", help="list pipeline presets or dump one")
    pre.add_argument("--dump", metavar="NAME", help="print the named preset config as YAML")
    return parser


def _cmd_synth(args: argparse.Namespace) -> int:
    cfg = preset(args.preset) if args.preset else load_pipeline_config(args.config)
    if args.seed is not None:
        cfg = with_seed(cfg, args.seed)
    isp = load_isp_config(args.isp_config) if args.isp_config else None
    manifest = load_manifest(args.manifest)
    result = run_batch(manifest, cfg, isp, args.out,
                       workers=args.workers, bit_depth=args.bit_depth)
    for record in result.records:
        print(f"ok   {record.scene_id}  {record.blurred}  sha256={record.checksum[:12]}")
    for failure in result.failures:
        print(f"FAIL {failure.scene_id}: {failure.error}", file=sys.stderr)
    print(f"{len(result.records)} scene(s) synthesized, {len(result.failures)} failed")
    return 0 if result.ok else 1


def _read_raw_dir(directory: str) -> list:
    paths = sorted(Path(directory).glob("*.png"))
    if not paths:
        raise BlurSynthError(f"no .png files in {directory}")
    return [raster.load_image(p, Stage.BAYER_RAW) for p in paths]


def _cmd_calibrate(args: argparse.Namespace) -> int:
    if not args.flat_dir and not args.dark_dir:
        print("calibrate needs --flat-dir and/or --dark-dir", file=sys.stderr)
        return 2
    if args.flat_dir:
        beta1 = calibrate_beta1(_read_raw_dir(args.flat_dir))
        print(f"beta1 = {beta1:.6g}")
    if args.dark_dir:
        beta2 = calibrate_beta2(_read_raw_dir(args.dark_dir))
        print(f"beta2 = {beta2:.6g}")
    return 0


def _cmd_presets(args: argparse.Namespace) -> int:
    if args.dump:
        cfg = preset(args.dump)
        print(yaml.safe_dump(config_to_dict(cfg), sort_keys=False), end="")
        return 0
    for name in PRESET_NAMES:
        print(f"{name:20s} {preset_description(name)}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            return _cmd_synth(args)
        if args.command == "calibrate":
            return _cmd_calibrate(args)
        return _cmd_presets(args)
    except BlurSynthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
