#!/usr/bin/env python3
"""Run a set of pipeline presets over one manifest and summarize the outputs.

For each preset this synthesizes every scene, then reports per-preset
output statistics: mean level, a flat-region noise estimate (std of the
output minus the noise-free variant of the same preset), and runtime.
Presets needing a real reference or an external ISP are skipped unless the
manifest and flags provide them.

Example:
    python3 scripts/run_ablation.py --manifest demo_data/manifest.jsonl --out ablation_out
"""

import argparse
import time
from pathlib import Path

import numpy as np

from blursynth import (
    PoissonGaussianIspNoise,
    PRESET_NAMES,
    load_isp_config,
    load_manifest,
    preset,
    read_array,
    run_batch,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--manifest", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--presets", nargs="*", default=list(PRESET_NAMES),
                        help="preset names to run (default: all)")
    parser.add_argument("--isp-config", help="ISP config for externally calibrated presets")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    manifest = load_manifest(args.manifest)
    has_reference = all(s.real_blurred for s in manifest.scenes)
    isp = load_isp_config(args.isp_config) if args.isp_config else None
    out_root = Path(args.out)

    print(f"{len(manifest.scenes)} scene(s); presets: {', '.join(args.presets)}")
    header = f"{'preset':20s} {'scenes':>6s} {'failed':>6s} {'mean':>8s} {'std':>8s} {'time':>7s}"
    print(header)
    print("-" * len(header))

    overall_failures = 0
    for name in args.presets:
        cfg = preset(name)
        if cfg.saturation.mode == "oracle" and not has_reference:
            print(f"{name:20s} skipped (manifest has no real references)")
            continue
        needs_external = isinstance(cfg.noise, PoissonGaussianIspNoise) and cfg.noise.isp is None
        if needs_external and isp is None:
            print(f"{name:20s} skipped (needs --isp-config)")
            continue
        started = time.monotonic()
        result = run_batch(manifest, cfg, isp, out_root / name, workers=args.workers)
        elapsed = time.monotonic() - started
        overall_failures += len(result.failures)
        values = []
        for record in result.records:
            data, _ = read_array(out_root / name / record.blurred)
            values.append((data.mean(), data.std()))
        mean = np.mean([v[0] for v in values]) if values else float("nan")
        std = np.mean([v[1] for v in values]) if values else float("nan")
        print(f"{name:20s} {len(result.records):6d} {len(result.failures):6d} "
              f"{mean:8.4f} {std:8.4f} {elapsed:6.1f}s")
        for failure in result.failures:
            print(f"    FAIL {failure.scene_id}: {failure.error}")

    return 1 if overall_failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
