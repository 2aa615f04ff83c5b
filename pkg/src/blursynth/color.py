"""Color-space and ISP math.

The simulated camera ISP is the four-step chain: white balance, bilinear
demosaicing, 3x3 color correction, and a camera response function (CRF).
The inverse chain (used to unprocess a linear image back to Bayer RAW)
skips the CRF: inverse color correction, then inverse white balance, then
mosaicing, all without clipping so the round trip stays lossless.
Clipping happens exactly once on the forward path, after color correction
and before CRF encoding.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Union

import numpy as np
import yaml

from .errors import ConfigError, DomainError
from .image import Image, Stage, require_even_dims, require_stage


@dataclass(frozen=True)
class GammaCrf:
    """Power-law response: encode(x) = x^(1/gamma), decode(x) = x^gamma."""

    gamma: float

    def __post_init__(self) -> None:
        if not self.gamma > 0:
            raise ConfigError(f"gamma must be positive, got {self.gamma}")

    def encode(self, x: np.ndarray) -> np.ndarray:
        return np.power(x, 1.0 / self.gamma)

    def decode(self, x: np.ndarray) -> np.ndarray:
        return np.power(x, self.gamma)


@dataclass(frozen=True, eq=False)
class LutCrf:
    """Tabulated response with linear interpolation between knots.

    Knots are (linear, encoded) pairs, strictly increasing in both
    coordinates with fixed endpoints (0, 0) and (1, 1). Decoding
    interpolates the same polyline in the other direction, so the pair of
    maps is an exact inverse up to float rounding.
    """

    linear: np.ndarray
    encoded: np.ndarray
    source: str | None = None

    def __post_init__(self) -> None:
        lin = np.asarray(self.linear, dtype=np.float64)
        enc = np.asarray(self.encoded, dtype=np.float64)
        if lin.ndim != 1 or lin.shape != enc.shape or lin.size < 2:
            raise ConfigError("LUT needs two 1-D knot vectors of equal length >= 2")
        if not (np.diff(lin) > 0).all() or not (np.diff(enc) > 0).all():
            raise ConfigError("LUT knots must be strictly increasing in both coordinates")
        if lin[0] != 0.0 or enc[0] != 0.0 or lin[-1] != 1.0 or enc[-1] != 1.0:
            raise ConfigError("LUT endpoints must be exactly (0, 0) and (1, 1)")
        lin.setflags(write=False)
        enc.setflags(write=False)
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "encoded", enc)

    def encode(self, x: np.ndarray) -> np.ndarray:
        return np.interp(x, self.linear, self.encoded)

    def decode(self, x: np.ndarray) -> np.ndarray:
        return np.interp(x, self.encoded, self.linear)


Crf = Union[GammaCrf, LutCrf]


def load_lut_file(path: str | Path) -> LutCrf:
    """Read a two-column (linear, encoded) plain-text LUT file."""
    path = Path(path)
    try:
        table = np.loadtxt(path, dtype=np.float64, ndmin=2)
    except Exception as exc:
        raise ConfigError(f"cannot parse LUT file {path}: {exc}") from exc
    if table.ndim != 2 or table.shape[1] != 2:
        raise ConfigError(f"LUT file {path} must have exactly two columns")
    return LutCrf(table[:, 0], table[:, 1], source=str(path))


class BayerPattern(Enum):
    RGGB = "RGGB"
    BGGR = "BGGR"
    GRBG = "GRBG"
    GBRG = "GBRG"


# Channel index (0=R, 1=G, 2=B) of each position in the 2x2 tile.
_TILES = {
    BayerPattern.RGGB: ((0, 1), (1, 2)),
    BayerPattern.BGGR: ((2, 1), (1, 0)),
    BayerPattern.GRBG: ((1, 0), (2, 1)),
    BayerPattern.GBRG: ((1, 2), (0, 1)),
}

# (flip_y, flip_x) that maps each pattern onto RGGB for even-sized images.
_FLIPS = {
    BayerPattern.RGGB: (False, False),
    BayerPattern.GRBG: (False, True),
    BayerPattern.GBRG: (True, False),
    BayerPattern.BGGR: (True, True),
}


@dataclass(frozen=True, eq=False)
class IspConfig:
    """Camera ISP parameters: WB gains, CCM, CRF, and the Bayer layout.

    ccm rows map camera RGB to linear sRGB; it must be invertible so the
    unprocessing path exists.
    """

    wb_gains: tuple[float, float, float] = (1.0, 1.0, 1.0)
    ccm: np.ndarray = None  # type: ignore[assignment]
    crf: Crf = GammaCrf(2.2)
    bayer_pattern: BayerPattern = BayerPattern.RGGB

    def __post_init__(self) -> None:
        gains = tuple(float(g) for g in self.wb_gains)
        if len(gains) != 3:
            raise ConfigError(f"wb_gains needs 3 values, got {len(gains)}")
        if any(g <= 0 for g in gains):
            raise ConfigError(f"wb_gains must all be positive, got {gains}")
        ccm = np.eye(3) if self.ccm is None else np.array(self.ccm, dtype=np.float64)
        if ccm.shape != (3, 3):
            raise ConfigError(f"ccm must be 3x3, got shape {ccm.shape}")
        if abs(np.linalg.det(ccm)) <= 1e-8:
            raise ConfigError("ccm is singular or nearly singular")
        ccm.setflags(write=False)
        object.__setattr__(self, "wb_gains", gains)
        object.__setattr__(self, "ccm", ccm)


def default_isp() -> IspConfig:
    """Unit gains, identity CCM, gamma 2.2, RGGB: the uncalibrated default."""
    return IspConfig()


def srgb_to_linear(img: Image, crf: Crf) -> Image:
    """Invert the CRF, taking an sRGB image to the linear space."""
    require_stage(img, Stage.SRGB)
    lo = float(img.data.min())
    hi = float(img.data.max())
    if lo < 0.0 or hi > 1.0:
        raise DomainError(f"sRGB samples must lie in [0, 1], got range [{lo}, {hi}]")
    return Image(crf.decode(img.data), Stage.LINEAR_SRGB)


def linear_to_srgb(img: Image, crf: Crf) -> Image:
    """Clip to [0, 1] and apply the CRF, producing an sRGB image."""
    require_stage(img, Stage.LINEAR_SRGB)
    return Image(crf.encode(np.clip(img.data, 0.0, 1.0)), Stage.SRGB)


def apply_wb(img: Image, gains: tuple[float, float, float], inverse: bool = False) -> Image:
    """Scale each channel by its white-balance gain (divide if inverse)."""
    require_stage(img, Stage.CAMERA_RGB)
    g = np.asarray(gains, dtype=np.float64)
    if g.shape != (3,) or (g <= 0).any():
        raise ConfigError(f"white-balance gains must be 3 positive reals, got {gains}")
    factors = 1.0 / g if inverse else g
    return Image(img.data * factors, Stage.CAMERA_RGB)


def apply_ccm(img: Image, ccm: np.ndarray, inverse: bool = False) -> Image:
    """Multiply each pixel by the CCM (or its inverse), toggling the stage.

    Forward maps camera RGB to linear sRGB; inverse maps back. No clipping.
    """
    ccm = np.asarray(ccm, dtype=np.float64)
    if ccm.shape != (3, 3):
        raise ConfigError(f"ccm must be 3x3, got shape {ccm.shape}")
    if abs(np.linalg.det(ccm)) <= 1e-8:
        raise ConfigError("ccm is singular or nearly singular")
    if inverse:
        require_stage(img, Stage.LINEAR_SRGB)
        matrix = np.linalg.inv(ccm)
        out_stage = Stage.CAMERA_RGB
    else:
        require_stage(img, Stage.CAMERA_RGB)
        matrix = ccm
        out_stage = Stage.LINEAR_SRGB
    return Image(img.data @ matrix.T, out_stage)


def _channel_grid(pattern: BayerPattern, height: int, width: int) -> np.ndarray:
    tile = np.asarray(_TILES[pattern], dtype=np.intp)
    return np.tile(tile, (height // 2, width // 2))


def mosaic(img: Image, pattern: BayerPattern) -> Image:
    """Sample one channel per pixel according to the Bayer pattern."""
    require_stage(img, Stage.CAMERA_RGB)
    require_even_dims(img)
    data = img.data
    out = np.empty(data.shape[:2], dtype=np.float64)
    tile = _TILES[pattern]
    for dy in (0, 1):
        for dx in (0, 1):
            out[dy::2, dx::2] = data[dy::2, dx::2, tile[dy][dx]]
    return Image(out, Stage.BAYER_RAW)


def _demosaic_rggb(m: np.ndarray) -> np.ndarray:
    # Reflect padding keeps Bayer phase (position -1 has the parity of +1),
    # so every gathered neighbor is a true same-channel sample and constant
    # images demosaic exactly, including at borders.
    p = np.pad(m, 1, mode="reflect")
    c = p[1:-1, 1:-1]
    n = p[:-2, 1:-1]
    s = p[2:, 1:-1]
    w = p[1:-1, :-2]
    e = p[1:-1, 2:]
    nw = p[:-2, :-2]
    ne = p[:-2, 2:]
    sw = p[2:, :-2]
    se = p[2:, 2:]

    h, wd = m.shape
    even_y = (np.arange(h) % 2 == 0)[:, None]
    even_x = (np.arange(wd) % 2 == 0)[None, :]
    r_mask = even_y & even_x
    gr_mask = even_y & ~even_x
    gb_mask = ~even_y & even_x
    b_mask = ~even_y & ~even_x

    horiz = 0.5 * (w + e)
    vert = 0.5 * (n + s)
    diag = 0.25 * (nw + ne + sw + se)
    plus = 0.25 * (n + s + w + e)

    red = np.where(r_mask, c, np.where(gr_mask, horiz, np.where(gb_mask, vert, diag)))
    green = np.where(r_mask | b_mask, plus, c)
    blue = np.where(b_mask, c, np.where(gb_mask, horiz, np.where(gr_mask, vert, diag)))
    return np.stack([red, green, blue], axis=2)


def demosaic_bilinear(img: Image, pattern: BayerPattern) -> Image:
    """Bilinear demosaic: sampled sites kept, missing sites averaged.

    Each missing value is the mean of the nearest same-channel neighbors
    (2 or 4 of them depending on the site). Out-of-bounds neighbors fall
    back to the nearest same-channel sample inside the image.
    """
    require_stage(img, Stage.BAYER_RAW)
    require_even_dims(img)
    flip_y, flip_x = _FLIPS[pattern]
    m = img.data
    if flip_y:
        m = m[::-1, :]
    if flip_x:
        m = m[:, ::-1]
    rgb = _demosaic_rggb(np.ascontiguousarray(m))
    if flip_y:
        rgb = rgb[::-1, :, :]
    if flip_x:
        rgb = rgb[:, ::-1, :]
    return Image(rgb, Stage.CAMERA_RGB)


def _wb_bayer(mosaic_data: np.ndarray, pattern: BayerPattern,
              gains: tuple[float, float, float]) -> np.ndarray:
    # Per-site gain on the mosaic; equals per-channel gain after demosaic
    # because demosaicing interpolates each channel independently.
    grid = _channel_grid(pattern, *mosaic_data.shape)
    return mosaic_data * np.asarray(gains, dtype=np.float64)[grid]


def inverse_isp(img: Image, isp: IspConfig) -> Image:
    """Unprocess a linear image to Bayer RAW without clipping.

    Runs inverse color correction, inverse white balance, and mosaicing,
    which is the ISP chain minus the CRF, inverted and reversed.
    """
    require_stage(img, Stage.LINEAR_SRGB)
    cam = apply_ccm(img, isp.ccm, inverse=True)
    cam = apply_wb(cam, isp.wb_gains, inverse=True)
    return mosaic(cam, isp.bayer_pattern)


def forward_isp(img: Image, isp: IspConfig) -> Image:
    """Develop Bayer RAW to sRGB: WB, demosaic, CCM, clip, CRF."""
    require_stage(img, Stage.BAYER_RAW)
    require_even_dims(img)
    balanced = Image(_wb_bayer(img.data, isp.bayer_pattern, isp.wb_gains), Stage.BAYER_RAW)
    rgb = demosaic_bilinear(balanced, isp.bayer_pattern)
    linear = apply_ccm(rgb, isp.ccm, inverse=False)
    clipped = Image(np.clip(linear.data, 0.0, 1.0), Stage.LINEAR_SRGB)
    return linear_to_srgb(clipped, isp.crf)


def crf_to_dict(crf: Crf | None) -> dict:
    if crf is None:
        return {"mode": "none"}
    if isinstance(crf, GammaCrf):
        return {"mode": "gamma", "gamma": crf.gamma}
    entry: dict = {"mode": "lut"}
    if crf.source is not None:
        entry["lut_file"] = crf.source
    else:
        entry["lut"] = [[float(l), float(e)] for l, e in zip(crf.linear, crf.encoded)]
    return entry


def crf_from_dict(entry: dict, base_dir: Path | None = None) -> Crf | None:
    mode = entry.get("mode")
    if mode == "none":
        return None
    if mode == "gamma":
        if "gamma" not in entry:
            raise ConfigError("crf mode 'gamma' needs a 'gamma' value")
        return GammaCrf(float(entry["gamma"]))
    if mode == "lut":
        if "lut_file" in entry:
            path = Path(entry["lut_file"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            return load_lut_file(path)
        if "lut" in entry:
            knots = np.asarray(entry["lut"], dtype=np.float64)
            if knots.ndim != 2 or knots.shape[1] != 2:
                raise ConfigError("inline 'lut' must be a list of [linear, encoded] pairs")
            return LutCrf(knots[:, 0], knots[:, 1])
        raise ConfigError("crf mode 'lut' needs 'lut_file' or inline 'lut'")
    raise ConfigError(f"unknown crf mode {mode!r}")


def isp_to_dict(isp: IspConfig) -> dict:
    return {
        "wb_gains": [float(g) for g in isp.wb_gains],
        "ccm": [float(v) for v in isp.ccm.reshape(-1)],
        "crf": crf_to_dict(isp.crf),
        "bayer_pattern": isp.bayer_pattern.value,
    }


def isp_from_dict(entry: dict, base_dir: Path | None = None) -> IspConfig:
    try:
        pattern = BayerPattern(entry.get("bayer_pattern", "RGGB"))
    except ValueError as exc:
        raise ConfigError(f"unknown bayer_pattern {entry.get('bayer_pattern')!r}") from exc
    ccm_values = entry.get("ccm")
    ccm = None if ccm_values is None else np.asarray(ccm_values, dtype=np.float64).reshape(3, 3)
    crf = crf_from_dict(entry.get("crf", {"mode": "gamma", "gamma": 2.2}), base_dir)
    if crf is None:
        raise ConfigError("an ISP config needs a gamma or lut CRF, not 'none'")
    return IspConfig(
        wb_gains=tuple(entry.get("wb_gains", (1.0, 1.0, 1.0))),
        ccm=ccm,
        crf=crf,
        bayer_pattern=pattern,
    )


def load_isp_config(path: str | Path) -> IspConfig:
    """Load an ISP config from a YAML key-value file."""
    path = Path(path)
    try:
        entry = yaml.safe_load(path.read_text())
    except Exception as exc:
        raise ConfigError(f"cannot parse ISP config {path}: {exc}") from exc
    if not isinstance(entry, dict):
        raise ConfigError(f"ISP config {path} must be a mapping")
    return isp_from_dict(entry, base_dir=path.parent)


def save_isp_config(isp: IspConfig, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(isp_to_dict(isp), sort_keys=False))
