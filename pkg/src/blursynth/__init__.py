"""Realistic motion-blur synthesis from sharp frame sequences.

Blurred/sharp training pairs are produced by simulating the physical blur
formation process: densifying the frame sequence, averaging in linear
space, reinjecting saturated highlights, unprocessing to Bayer RAW,
adding Poisson-Gaussian sensor noise, and developing through a simulated
camera ISP. Every stage can be switched independently, and the ablation
variants are available as named presets.
"""

from .blur import (
    SaturationMask,
    SharpSequence,
    apply_oracle_saturation,
    apply_saturation,
    average_frames,
    expand_sequence,
    interpolate_midpoint,
    load_external_frames,
    saturation_mask,
)
from .color import (
    BayerPattern,
    Crf,
    GammaCrf,
    IspConfig,
    LutCrf,
    apply_ccm,
    apply_wb,
    default_isp,
    demosaic_bilinear,
    forward_isp,
    inverse_isp,
    linear_to_srgb,
    load_isp_config,
    load_lut_file,
    mosaic,
    save_isp_config,
    srgb_to_linear,
)
from .dataset import (
    BatchResult,
    DatasetManifest,
    OutputRecord,
    SceneFailure,
    SceneRecord,
    load_manifest,
    load_scene,
    run_batch,
    write_image,
)
from .errors import (
    BlurSynthError,
    CalibrationError,
    ConfigError,
    DomainError,
    ManifestError,
    RasterError,
    ShapeError,
    StageError,
)
from .image import Image, Stage
from .noise import (
    NoiseParams,
    RngStream,
    add_gaussian,
    add_poisson_gaussian,
    calibrate_beta1,
    calibrate_beta2,
    derive_rng,
    jitter,
)
from .pipeline import (
    GaussianNoise,
    Interpolation,
    PipelineConfig,
    PoissonGaussianIspNoise,
    PRESET_NAMES,
    Provenance,
    Saturation,
    SynthesisOutput,
    config_to_dict,
    load_pipeline_config,
    preset,
    preset_switches,
    synthesize,
    with_seed,
)
from .raster import load_image, read_array

__version__ = "0.1.0"

__all__ = [
    "BatchResult",
    "BayerPattern",
    "BlurSynthError",
    "CalibrationError",
    "ConfigError",
    "Crf",
    "DatasetManifest",
    "DomainError",
    "GammaCrf",
    "GaussianNoise",
    "Image",
    "Interpolation",
    "IspConfig",
    "LutCrf",
    "ManifestError",
    "NoiseParams",
    "OutputRecord",
    "PipelineConfig",
    "PoissonGaussianIspNoise",
    "PRESET_NAMES",
    "Provenance",
    "RasterError",
    "RngStream",
    "SaturationMask",
    "SceneFailure",
    "SceneRecord",
    "ShapeError",
    "SharpSequence",
    "Stage",
    "StageError",
    "SynthesisOutput",
    "Saturation",
    "add_gaussian",
    "add_poisson_gaussian",
    "apply_ccm",
    "apply_oracle_saturation",
    "apply_saturation",
    "apply_wb",
    "average_frames",
    "calibrate_beta1",
    "calibrate_beta2",
    "config_to_dict",
    "default_isp",
    "demosaic_bilinear",
    "derive_rng",
    "expand_sequence",
    "forward_isp",
    "interpolate_midpoint",
    "inverse_isp",
    "jitter",
    "linear_to_srgb",
    "load_external_frames",
    "load_image",
    "load_isp_config",
    "load_lut_file",
    "load_manifest",
    "load_pipeline_config",
    "load_scene",
    "mosaic",
    "preset",
    "preset_switches",
    "read_array",
    "run_batch",
    "saturation_mask",
    "save_isp_config",
    "srgb_to_linear",
    "synthesize",
    "with_seed",
    "write_image",
]
