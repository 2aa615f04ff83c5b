"""Sensor-noise synthesis and noise-parameter calibration.

RAW-domain noise follows the Poisson-Gaussian model

    noisy = beta1 * P(signal / beta1) + N(0, beta2)

where beta1 is the overall system gain (so shot-noise variance is
beta1 * signal) and beta2 is the read-noise standard deviation. The
sRGB-domain baseline simply adds N(0, sigma) and clips. Calibration
recovers beta1 from flat fields (variance-vs-mean slope) and beta2 from
dark frames (pooled deviation about per-site means).

All randomness flows through counter-based Philox generators keyed by
(seed, stream tokens), so per-image streams are independent and batches
reproduce bit-exactly regardless of worker count or completion order.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CalibrationError, ConfigError
from .image import Image, Stage, require_stage


@dataclass(frozen=True)
class NoiseParams:
    """Calibrated noise model parameters plus the jitter range.

    beta1: overall system gain (signal units per photon-count unit).
    beta2: read-noise standard deviation, in signal units.
    sigma_srgb: standard deviation of the sRGB Gaussian baseline.
    jitter_lo, jitter_hi: multiplicative sampling range widening the noise
    distribution across synthesized images.
    """

    beta1: float = 1e-4
    beta2: float = 9e-4
    sigma_srgb: float = 0.0112
    jitter_lo: float = 0.5
    jitter_hi: float = 1.5

    def __post_init__(self) -> None:
        if not self.beta1 > 0:
            raise ConfigError(f"beta1 must be positive, got {self.beta1}")
        if self.beta2 < 0:
            raise ConfigError(f"beta2 must be >= 0, got {self.beta2}")
        if self.sigma_srgb < 0:
            raise ConfigError(f"sigma_srgb must be >= 0, got {self.sigma_srgb}")
        if not 0 < self.jitter_lo <= self.jitter_hi:
            raise ConfigError(
                f"jitter bounds need 0 < lo <= hi, got ({self.jitter_lo}, {self.jitter_hi})"
            )


def _token_entropy(token: str | int) -> int:
    if isinstance(token, int):
        return token & 0xFFFFFFFFFFFFFFFF
    digest = hashlib.sha256(str(token).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class RngStream:
    """A named, reproducible random stream: (seed, stream tokens).

    Identical (seed, stream) pairs always yield identical sample
    sequences; distinct tokens give statistically independent streams.
    """

    seed: int
    stream: tuple[str | int, ...] = ()

    def generator(self) -> np.random.Generator:
        entropy = (_token_entropy(self.seed),) + tuple(
            _token_entropy(t) for t in self.stream
        )
        return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def derive_rng(seed: int, *stream: str | int) -> np.random.Generator:
    return RngStream(seed, stream).generator()


def jitter(value: float, lo: float, hi: float, rng: np.random.Generator) -> float:
    """Scale value by a uniform draw from [lo, hi]."""
    if not 0 < lo <= hi:
        raise ConfigError(f"jitter bounds need 0 < lo <= hi, got ({lo}, {hi})")
    return float(value * rng.uniform(lo, hi))


def add_poisson_gaussian(img: Image, beta1: float, beta2: float,
                         rng: np.random.Generator,
                         gaussian_approx_above: float = math.inf) -> Image:
    """Apply Poisson shot noise and Gaussian read noise to a RAW image.

    Per sample: draw P(b / beta1), scale by beta1, add N(0, beta2). The
    mean stays b and the variance is beta1 * b + beta2^2. Negative samples
    (possible after inverse color correction) clamp the Poisson rate to
    zero; read noise is still added. No clipping here.

    The Poisson sampler is exact at every rate. Sites with rate above
    gaussian_approx_above (default: never) use the N(rate, sqrt(rate))
    approximation instead; only cutoffs of 1e4 or more are accepted so the
    approximation cannot degrade low-signal statistics.
    """
    require_stage(img, Stage.BAYER_RAW)
    if not beta1 > 0:
        raise ConfigError(f"beta1 must be positive, got {beta1}")
    if beta2 < 0:
        raise ConfigError(f"beta2 must be >= 0, got {beta2}")
    if gaussian_approx_above < 1e4:
        raise ConfigError(
            f"gaussian_approx_above must be >= 1e4, got {gaussian_approx_above}"
        )
    rate = np.maximum(img.data, 0.0) / beta1
    if math.isfinite(gaussian_approx_above) and (rate > gaussian_approx_above).any():
        big = rate > gaussian_approx_above
        counts = np.empty_like(rate)
        counts[~big] = rng.poisson(rate[~big])
        counts[big] = rng.normal(rate[big], np.sqrt(rate[big]))
    else:
        counts = rng.poisson(rate).astype(np.float64)
    noisy = counts * beta1
    if beta2 > 0:
        noisy = noisy + rng.normal(0.0, beta2, size=noisy.shape)
    return Image(noisy, Stage.BAYER_RAW)


def add_gaussian(img: Image, sigma: float, rng: np.random.Generator) -> Image:
    """Add N(0, sigma) per sample to an sRGB image, then clip to [0, 1]."""
    require_stage(img, Stage.SRGB)
    if sigma < 0:
        raise ConfigError(f"sigma must be >= 0, got {sigma}")
    data = img.data
    if sigma > 0:
        data = data + rng.normal(0.0, sigma, size=data.shape)
    return Image(np.clip(data, 0.0, 1.0), Stage.SRGB)


def calibrate_beta1(flat_fields: Sequence[Image]) -> float:
    """Estimate the system gain from flat-field exposures.

    Each flat contributes one (mean, variance) point; the least-squares
    slope of variance against mean is beta1. Needs at least two flats at
    distinct signal levels.
    """
    if len(flat_fields) < 2:
        raise CalibrationError(
            f"need at least 2 flat-field images, got {len(flat_fields)}"
        )
    for f in flat_fields:
        require_stage(f, Stage.BAYER_RAW)
    means = np.array([float(f.data.mean()) for f in flat_fields])
    variances = np.array([float(f.data.var(ddof=1)) for f in flat_fields])
    if np.ptp(means) < 1e-12:
        raise CalibrationError("flat fields must span distinct mean levels")
    slope, _ = np.polyfit(means, variances, 1)
    return float(slope)


def calibrate_beta2(dark_frames: Sequence[Image]) -> float:
    """Estimate read-noise sigma as the pooled per-site deviation of darks."""
    if len(dark_frames) == 0:
        raise CalibrationError("need at least 1 dark frame")
    for f in dark_frames:
        require_stage(f, Stage.BAYER_RAW)
        if f.data.shape != dark_frames[0].data.shape:
            raise CalibrationError("dark frames must share dimensions")
    if len(dark_frames) == 1:
        return 0.0
    stack = np.stack([f.data for f in dark_frames])
    site_mean = stack.mean(axis=0)
    squares = ((stack - site_mean) ** 2).sum()
    count = stack.shape[0]
    sites = site_mean.size
    return float(np.sqrt(squares / (sites * (count - 1))))
