"""Exception hierarchy shared by all blursynth modules."""


class BlurSynthError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(BlurSynthError):
    """Sample values outside the range an operation requires."""


class ShapeError(BlurSynthError):
    """Image dimensions or frame shapes that do not match."""


class StageError(BlurSynthError):
    """Operation applied to an image in the wrong color-space stage."""


class ConfigError(BlurSynthError):
    """Invalid configuration value, preset name, or option conflict."""


class CalibrationError(BlurSynthError):
    """Calibration input that cannot support a parameter estimate."""


class ManifestError(BlurSynthError):
    """Malformed manifest, duplicate ids, or missing referenced files."""


class RasterError(BlurSynthError):
    """Image file that cannot be decoded or has an unsupported layout."""
