"""Synthesis orchestration and named pipeline variants.

synthesize() wires the stage graph: optional frame expansion, CRF decode,
linear averaging, a saturation step, and one of three noise branches
(none, Gaussian in sRGB, or Poisson-Gaussian in RAW behind a simulated
ISP). The switch combinations used for ablation comparisons ship as named
presets.

Randomness is split into two per-scene streams derived from the global
seed: a "params" stream for per-image parameter draws (saturation alpha,
jittered noise parameters) and a "noise" stream for the pixel noise
itself. The provenance record carries the sampled values and stream
names, so any output can be re-derived bit-exactly, either by re-running
synthesize or by composing the module operations by hand with the
recorded values.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

import yaml

from .blur import (
    SaturationMask,
    SharpSequence,
    apply_oracle_saturation,
    apply_saturation,
    average_frames,
    expand_sequence,
    saturation_mask,
)
from .color import (
    Crf,
    GammaCrf,
    IspConfig,
    crf_from_dict,
    crf_to_dict,
    default_isp,
    inverse_isp,
    forward_isp,
    isp_from_dict,
    isp_to_dict,
    linear_to_srgb,
    load_isp_config,
    srgb_to_linear,
)
from .errors import ConfigError
from .image import Image
from .noise import NoiseParams, derive_rng, jitter, add_gaussian, add_poisson_gaussian

PARAMS_STREAM = "params"
NOISE_STREAM = "noise"

_INTERP_MODES = ("off", "midpoint", "external")
_SAT_MODES = ("off", "ours", "oracle")


@dataclass(frozen=True)
class Interpolation:
    """Frame-expansion switch: off, recursive midpoint, or external frames.

    "external" declares that the sequence was already densified outside
    the pipeline (e.g. by a learned interpolator), so no expansion runs.
    """

    mode: str = "off"
    rounds: int = 0

    def __post_init__(self) -> None:
        if self.mode not in _INTERP_MODES:
            raise ConfigError(f"interpolation mode must be one of {_INTERP_MODES}")
        if self.rounds < 0:
            raise ConfigError(f"interpolation rounds must be >= 0, got {self.rounds}")


@dataclass(frozen=True)
class Saturation:
    """Saturation-synthesis switch and its parameters.

    "ours" boosts by a mask scaled with alpha ~ U(alpha_lo, alpha_hi);
    "oracle" copies reference pixels under the mask. The mask counts
    frames with samples >= threshold, over all averaged frames by default
    or only the captured source frames when source_frames_only is set.
    """

    mode: str = "off"
    alpha_lo: float = 0.25
    alpha_hi: float = 1.25
    threshold: float = 1.0
    source_frames_only: bool = False

    def __post_init__(self) -> None:
        if self.mode not in _SAT_MODES:
            raise ConfigError(f"saturation mode must be one of {_SAT_MODES}")
        if not 0 <= self.alpha_lo <= self.alpha_hi:
            raise ConfigError(
                f"alpha bounds need 0 <= lo <= hi, got ({self.alpha_lo}, {self.alpha_hi})"
            )
        if not 0.0 < self.threshold <= 1.0:
            raise ConfigError(f"threshold must lie in (0, 1], got {self.threshold}")


@dataclass(frozen=True)
class GaussianNoise:
    """sRGB Gaussian branch: sigma jittered by U(jitter_lo, jitter_hi)."""

    sigma: float = 0.0112
    jitter_lo: float = 0.5
    jitter_hi: float = 1.5

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise ConfigError(f"sigma must be >= 0, got {self.sigma}")
        if not 0 < self.jitter_lo <= self.jitter_hi:
            raise ConfigError(
                f"jitter bounds need 0 < lo <= hi, got ({self.jitter_lo}, {self.jitter_hi})"
            )


@dataclass(frozen=True, eq=False)
class PoissonGaussianIspNoise:
    """RAW Poisson-Gaussian branch behind a simulated ISP.

    When isp is None the ISP parameters must arrive at synthesis time
    (e.g. from an externally calibrated config file).
    """

    params: NoiseParams = field(default_factory=NoiseParams)
    isp: Optional[IspConfig] = None


NoiseSpec = Union[GaussianNoise, PoissonGaussianIspNoise, None]


@dataclass(frozen=True, eq=False)
class PipelineConfig:
    """Full switch set for one synthesis variant, plus the global seed.

    crf None means frames are averaged directly in the encoded sample
    space with no decode/encode step.
    """

    crf: Optional[Crf] = GammaCrf(2.2)
    interpolation: Interpolation = Interpolation()
    saturation: Saturation = Saturation()
    noise: NoiseSpec = None
    seed: int = 0
    name: str = "custom"


@dataclass(frozen=True)
class Provenance:
    """Everything sampled while synthesizing one image.

    Streams are derived as (seed, scene_id, role); together with the
    config and input sequence this reproduces the output bit-exactly.
    """

    preset: str
    seed: int
    scene_id: str
    params_stream: Optional[tuple[str, str]] = None
    noise_stream: Optional[tuple[str, str]] = None
    alpha: Optional[float] = None
    beta1_prime: Optional[float] = None
    beta2_prime: Optional[float] = None
    sigma_prime: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "preset": self.preset,
            "seed": self.seed,
            "scene_id": self.scene_id,
            "params_stream": list(self.params_stream) if self.params_stream else None,
            "noise_stream": list(self.noise_stream) if self.noise_stream else None,
            "alpha": self.alpha,
            "beta1_prime": self.beta1_prime,
            "beta2_prime": self.beta2_prime,
            "sigma_prime": self.sigma_prime,
        }


@dataclass(frozen=True, eq=False)
class SynthesisOutput:
    blurred: Image
    gt_sharp: Image
    mask: SaturationMask
    provenance: Provenance


def synthesize(seq: SharpSequence, cfg: PipelineConfig,
               isp: Optional[IspConfig] = None) -> SynthesisOutput:
    """Run the configured synthesis graph over one sharp sequence.

    Stage order: expand frames, decode to linear, average, saturation
    step, then the noise branch. The Gaussian branch encodes first and
    adds noise in sRGB; the Poisson-Gaussian branch unprocesses to RAW,
    adds sensor noise, and develops through the forward ISP. An explicit
    isp argument overrides any ISP embedded in the noise spec.
    """
    sat = cfg.saturation
    if sat.mode == "oracle" and seq.real_blurred is None:
        raise ConfigError(
            f"scene {seq.scene_id!r}: oracle saturation needs a real blurred reference"
        )
    resolved_isp: Optional[IspConfig] = None
    if isinstance(cfg.noise, PoissonGaussianIspNoise):
        resolved_isp = isp if isp is not None else cfg.noise.isp
        if resolved_isp is None:
            raise ConfigError("poisson_gaussian_isp noise needs an ISP config")

    decode_crf = cfg.crf if cfg.crf is not None else GammaCrf(1.0)

    work = seq
    if cfg.interpolation.mode == "midpoint" and cfg.interpolation.rounds > 0:
        work = expand_sequence(seq, cfg.interpolation.rounds)
    mask_frames = seq.frames if sat.source_frames_only else work.frames
    mask = saturation_mask(mask_frames, sat.threshold)

    linear_frames = [srgb_to_linear(f, decode_crf) for f in work.frames]
    blurred_linear = average_frames(linear_frames)

    alpha = beta1_prime = beta2_prime = sigma_prime = None
    params_stream = noise_stream = None
    params_rng = None

    def params():
        nonlocal params_rng, params_stream
        if params_rng is None:
            params_stream = (seq.scene_id, PARAMS_STREAM)
            params_rng = derive_rng(cfg.seed, *params_stream)
        return params_rng

    if sat.mode == "ours":
        alpha = float(params().uniform(sat.alpha_lo, sat.alpha_hi))
        saturated = apply_saturation(blurred_linear, mask, alpha)
    elif sat.mode == "oracle":
        reference_linear = srgb_to_linear(seq.real_blurred, decode_crf)
        saturated = apply_oracle_saturation(blurred_linear, reference_linear, mask)
    else:
        saturated = blurred_linear

    if cfg.noise is None:
        blurred = linear_to_srgb(saturated, decode_crf)
    elif isinstance(cfg.noise, GaussianNoise):
        sigma_prime = jitter(cfg.noise.sigma, cfg.noise.jitter_lo,
                             cfg.noise.jitter_hi, params())
        encoded = linear_to_srgb(saturated, decode_crf)
        noise_stream = (seq.scene_id, NOISE_STREAM)
        blurred = add_gaussian(encoded, sigma_prime, derive_rng(cfg.seed, *noise_stream))
    else:
        p = cfg.noise.params
        beta1_prime = jitter(p.beta1, p.jitter_lo, p.jitter_hi, params())
        beta2_prime = jitter(p.beta2, p.jitter_lo, p.jitter_hi, params())
        raw = inverse_isp(saturated, resolved_isp)
        noise_stream = (seq.scene_id, NOISE_STREAM)
        noisy = add_poisson_gaussian(raw, beta1_prime, beta2_prime,
                                     derive_rng(cfg.seed, *noise_stream))
        blurred = forward_isp(noisy, resolved_isp)

    provenance = Provenance(
        preset=cfg.name,
        seed=cfg.seed,
        scene_id=seq.scene_id,
        params_stream=params_stream,
        noise_stream=noise_stream,
        alpha=alpha,
        beta1_prime=beta1_prime,
        beta2_prime=beta2_prime,
        sigma_prime=sigma_prime,
    )
    return SynthesisOutput(blurred=blurred, gt_sharp=seq.frames[seq.gt_index],
                           mask=mask, provenance=provenance)


def _gamma22() -> GammaCrf:
    return GammaCrf(2.2)


def _interp3() -> Interpolation:
    return Interpolation(mode="midpoint", rounds=3)


def _build_presets() -> dict[str, tuple[PipelineConfig, str]]:
    gauss = GaussianNoise()
    sensor = PoissonGaussianIspNoise(params=NoiseParams(), isp=default_isp())
    sensor_external = PoissonGaussianIspNoise(params=NoiseParams(), isp=None)
    ours = Saturation(mode="ours")
    oracle = Saturation(mode="oracle")
    entries = {
        "naive_linear": (
            PipelineConfig(crf=None, name="naive_linear"),
            "average frames directly in the encoded sample space",
        ),
        "naive_gamma22": (
            PipelineConfig(crf=_gamma22(), name="naive_gamma22"),
            "gamma 2.2 decode, average, encode",
        ),
        "gamma22_G": (
            PipelineConfig(crf=_gamma22(), noise=gauss, name="gamma22_G"),
            "naive gamma averaging plus sRGB Gaussian noise",
        ),
        "gamma22_interp": (
            PipelineConfig(crf=_gamma22(), interpolation=_interp3(),
                           name="gamma22_interp"),
            "gamma decode with recursive midpoint interpolation (9 to 65 frames)",
        ),
        "gamma22_interp_G": (
            PipelineConfig(crf=_gamma22(), interpolation=_interp3(), noise=gauss,
                           name="gamma22_interp_G"),
            "interpolation plus sRGB Gaussian noise",
        ),
        "interp_G_satOracle": (
            PipelineConfig(crf=_gamma22(), interpolation=_interp3(), saturation=oracle,
                           noise=gauss, name="interp_G_satOracle"),
            "interpolation, reference-guided saturation, Gaussian noise",
        ),
        "interp_G_satOurs": (
            PipelineConfig(crf=_gamma22(), interpolation=_interp3(), saturation=ours,
                           noise=gauss, name="interp_G_satOurs"),
            "interpolation, mask-boost saturation, Gaussian noise",
        ),
        "full_oracle": (
            PipelineConfig(crf=_gamma22(), interpolation=_interp3(), saturation=oracle,
                           noise=sensor, name="full_oracle"),
            "reference-guided saturation with RAW sensor noise and ISP",
        ),
        "full_ours": (
            PipelineConfig(crf=_gamma22(), interpolation=_interp3(), saturation=ours,
                           noise=sensor, name="full_ours"),
            "mask-boost saturation with RAW sensor noise and ISP",
        ),
        "gopro_A7R3-style": (
            PipelineConfig(crf=_gamma22(), interpolation=_interp3(), saturation=ours,
                           noise=sensor_external, name="gopro_A7R3-style"),
            "full pipeline with an externally calibrated ISP (pass --isp-config)",
        ),
    }
    return entries


_PRESETS = _build_presets()

PRESET_NAMES: tuple[str, ...] = tuple(_PRESETS)


def preset(name: str) -> PipelineConfig:
    """Look up a named pipeline variant."""
    try:
        return _PRESETS[name][0]
    except KeyError:
        known = ", ".join(PRESET_NAMES)
        raise ConfigError(f"unknown preset {name!r}; known presets: {known}") from None


def preset_description(name: str) -> str:
    preset(name)
    return _PRESETS[name][1]


def preset_switches(name: str) -> dict:
    """Compact switch row for a preset: the ablation-matrix encoding."""
    cfg = preset(name)
    if cfg.crf is None:
        crf = "linear"
    elif isinstance(cfg.crf, GammaCrf):
        crf = str(cfg.crf.gamma)
    else:
        crf = "lut"
    if isinstance(cfg.noise, GaussianNoise):
        noise = "gaussian"
    elif isinstance(cfg.noise, PoissonGaussianIspNoise):
        noise = "gaussian+poisson"
    else:
        noise = "off"
    isp: bool | str = False
    if isinstance(cfg.noise, PoissonGaussianIspNoise):
        isp = "external" if cfg.noise.isp is None else True
    return {
        "crf": crf,
        "interpolation": cfg.interpolation.mode != "off",
        "saturation": cfg.saturation.mode,
        "noise": noise,
        "isp": isp,
    }


def config_to_dict(cfg: PipelineConfig) -> dict:
    interp: dict = {"mode": cfg.interpolation.mode}
    if cfg.interpolation.mode == "midpoint":
        interp["rounds"] = cfg.interpolation.rounds
    sat: dict = {"mode": cfg.saturation.mode}
    if cfg.saturation.mode != "off":
        sat["threshold"] = cfg.saturation.threshold
        sat["source_frames_only"] = cfg.saturation.source_frames_only
    if cfg.saturation.mode == "ours":
        sat["alpha"] = [cfg.saturation.alpha_lo, cfg.saturation.alpha_hi]
    if cfg.noise is None:
        noise: dict = {"mode": "off"}
    elif isinstance(cfg.noise, GaussianNoise):
        noise = {
            "mode": "gaussian",
            "sigma": cfg.noise.sigma,
            "jitter": [cfg.noise.jitter_lo, cfg.noise.jitter_hi],
        }
    else:
        p = cfg.noise.params
        noise = {
            "mode": "poisson_gaussian_isp",
            "beta1": p.beta1,
            "beta2": p.beta2,
            "jitter": [p.jitter_lo, p.jitter_hi],
            "isp": "external" if cfg.noise.isp is None else isp_to_dict(cfg.noise.isp),
        }
    return {
        "name": cfg.name,
        "seed": cfg.seed,
        "crf": crf_to_dict(cfg.crf),
        "interpolation": interp,
        "saturation": sat,
        "noise": noise,
    }


def config_from_dict(entry: dict, base_dir: Path | None = None) -> PipelineConfig:
    crf = crf_from_dict(entry.get("crf", {"mode": "gamma", "gamma": 2.2}), base_dir)
    interp_entry = entry.get("interpolation", {"mode": "off"})
    interpolation = Interpolation(
        mode=interp_entry.get("mode", "off"),
        rounds=int(interp_entry.get("rounds", 0)),
    )
    sat_entry = entry.get("saturation", {"mode": "off"})
    alpha = sat_entry.get("alpha", [0.25, 1.25])
    saturation = Saturation(
        mode=sat_entry.get("mode", "off"),
        alpha_lo=float(alpha[0]),
        alpha_hi=float(alpha[1]),
        threshold=float(sat_entry.get("threshold", 1.0)),
        source_frames_only=bool(sat_entry.get("source_frames_only", False)),
    )
    noise_entry = entry.get("noise", {"mode": "off"})
    mode = noise_entry.get("mode", "off")
    noise: NoiseSpec
    if mode == "off":
        noise = None
    elif mode == "gaussian":
        jit = noise_entry.get("jitter", [0.5, 1.5])
        noise = GaussianNoise(
            sigma=float(noise_entry.get("sigma", 0.0112)),
            jitter_lo=float(jit[0]),
            jitter_hi=float(jit[1]),
        )
    elif mode == "poisson_gaussian_isp":
        jit = noise_entry.get("jitter", [0.5, 1.5])
        params = NoiseParams(
            beta1=float(noise_entry.get("beta1", 1e-4)),
            beta2=float(noise_entry.get("beta2", 9e-4)),
            sigma_srgb=float(noise_entry.get("sigma", 0.0112)),
            jitter_lo=float(jit[0]),
            jitter_hi=float(jit[1]),
        )
        isp_entry = noise_entry.get("isp", "external")
        if isp_entry == "external":
            isp = None
        elif isp_entry == "default":
            isp = default_isp()
        elif isinstance(isp_entry, dict):
            isp = isp_from_dict(isp_entry, base_dir)
        elif isinstance(isp_entry, str):
            path = Path(isp_entry)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            isp = load_isp_config(path)
        else:
            raise ConfigError(f"cannot interpret noise isp entry {isp_entry!r}")
        noise = PoissonGaussianIspNoise(params=params, isp=isp)
    else:
        raise ConfigError(f"unknown noise mode {mode!r}")
    return PipelineConfig(
        crf=crf,
        interpolation=interpolation,
        saturation=saturation,
        noise=noise,
        seed=int(entry.get("seed", 0)),
        name=str(entry.get("name", "custom")),
    )


def load_pipeline_config(path: str | Path) -> PipelineConfig:
    """Load a pipeline config from a YAML file."""
    path = Path(path)
    try:
        entry = yaml.safe_load(path.read_text())
    except Exception as exc:
        raise ConfigError(f"cannot parse pipeline config {path}: {exc}") from exc
    if not isinstance(entry, dict):
        raise ConfigError(f"pipeline config {path} must be a mapping")
    return config_from_dict(entry, base_dir=path.parent)


def with_seed(cfg: PipelineConfig, seed: int) -> PipelineConfig:
    return replace(cfg, seed=seed)
