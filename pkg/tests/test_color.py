import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from blursynth import (
    ConfigError,
    DomainError,
    GammaCrf,
    BayerPattern,
    Image,
    IspConfig,
    LutCrf,
    ShapeError,
    Stage,
    StageError,
    apply_ccm,
    apply_wb,
    default_isp,
    demosaic_bilinear,
    forward_isp,
    inverse_isp,
    linear_to_srgb,
    load_lut_file,
    mosaic,
    srgb_to_linear,
)
from helpers import bayer_constant, constant, realistic_isp

# Channel index (0=R, 1=G, 2=B) per 2x2 tile position, written out
# independently of the implementation.
TILES = {
    BayerPattern.RGGB: ((0, 1), (1, 2)),
    BayerPattern.BGGR: ((2, 1), (1, 0)),
    BayerPattern.GRBG: ((1, 0), (2, 1)),
    BayerPattern.GBRG: ((1, 2), (0, 1)),
}


def tone_curve_lut(knots: int = 33) -> LutCrf:
    linear = np.linspace(0.0, 1.0, knots)
    encoded = linear ** (1.0 / 2.2)
    encoded[0], encoded[-1] = 0.0, 1.0
    return LutCrf(linear, encoded)


# --------------------------------------------------------------------------
# CRF


def test_gamma_decode_endpoints_fixed():
    crf = GammaCrf(2.2)
    img = constant(0.0, stage=Stage.SRGB)
    assert srgb_to_linear(img, crf).data.max() == 0.0
    img = constant(1.0, stage=Stage.SRGB)
    assert srgb_to_linear(img, crf).data.min() == 1.0


def test_gamma_decode_half_matches_high_precision_oracle():
    mpmath.mp.dps = 40
    expected = float(mpmath.power(mpmath.mpf(1) / 2, mpmath.mpf("2.2")))
    assert expected == pytest.approx(0.217637640824031, abs=1e-15)
    out = srgb_to_linear(constant(0.5), GammaCrf(2.2))
    assert out.data[0, 0, 0] == pytest.approx(expected, abs=1e-12)
    assert out.stage is Stage.LINEAR_SRGB


def test_gamma_encode_inverts_the_oracle_value():
    out = linear_to_srgb(constant(0.217637640824031, stage=Stage.LINEAR_SRGB), GammaCrf(2.2))
    assert out.data[0, 0, 0] == pytest.approx(0.5, abs=1e-12)


def test_identity_gamma_is_a_passthrough():
    values = np.linspace(0, 1, 7).reshape(1, 7, 1) * np.ones((1, 1, 3))
    img = Image(values, Stage.LINEAR_SRGB)
    assert np.array_equal(linear_to_srgb(img, GammaCrf(1.0)).data, values)


def test_encode_clips_before_applying_the_curve():
    out = linear_to_srgb(constant(1.3, stage=Stage.LINEAR_SRGB), GammaCrf(2.2))
    assert out.data.max() == 1.0


def test_decode_rejects_out_of_range_samples():
    with pytest.raises(DomainError):
        srgb_to_linear(constant(1.2), GammaCrf(2.2))
    with pytest.raises(DomainError):
        srgb_to_linear(Image(np.full((2, 2, 3), -0.1), Stage.SRGB), GammaCrf(2.2))


def test_stage_tags_enforced_for_crf_ops():
    with pytest.raises(StageError):
        srgb_to_linear(constant(0.5, stage=Stage.LINEAR_SRGB), GammaCrf(2.2))
    with pytest.raises(StageError):
        linear_to_srgb(constant(0.5, stage=Stage.SRGB), GammaCrf(2.2))


@given(st.floats(0, 1), st.floats(0, 1))
def test_crf_monotone(x, y):
    lo, hi = sorted((x, y))
    for crf in (GammaCrf(2.2), tone_curve_lut()):
        assert crf.encode(np.float64(lo)) <= crf.encode(np.float64(hi))
        assert crf.decode(np.float64(lo)) <= crf.decode(np.float64(hi))


@given(st.lists(st.floats(0, 1), min_size=1, max_size=32))
def test_crf_round_trip_within_tolerance(values):
    arr = np.asarray(values)
    for crf in (GammaCrf(2.2), tone_curve_lut()):
        assert np.abs(crf.decode(crf.encode(arr)) - arr).max() < 1e-6
        assert np.abs(crf.encode(crf.decode(arr)) - arr).max() < 1e-6


def test_lut_validation_errors():
    with pytest.raises(ConfigError):
        LutCrf(np.array([0.0, 0.5, 0.5, 1.0]), np.array([0.0, 0.3, 0.6, 1.0]))
    with pytest.raises(ConfigError):
        LutCrf(np.array([0.0, 1.0]), np.array([0.1, 1.0]))
    with pytest.raises(ConfigError):
        LutCrf(np.array([0.0]), np.array([0.0]))


def test_lut_file_round_trip(tmp_path):
    lut = tone_curve_lut(17)
    path = tmp_path / "curve.txt"
    np.savetxt(path, np.column_stack([lut.linear, lut.encoded]))
    loaded = load_lut_file(path)
    x = np.linspace(0, 1, 101)
    assert np.allclose(loaded.encode(x), lut.encode(x), atol=1e-12)
    assert loaded.source == str(path)


def test_lut_interpolates_linearly_between_knots():
    lut = LutCrf(np.array([0.0, 0.4, 1.0]), np.array([0.0, 0.7, 1.0]))
    assert lut.encode(np.float64(0.2)) == pytest.approx(0.35, abs=1e-15)
    assert lut.decode(np.float64(0.85)) == pytest.approx(0.7, abs=1e-15)


# --------------------------------------------------------------------------
# White balance and color correction


def test_wb_scales_each_channel():
    img = constant((0.2, 0.2, 0.2), stage=Stage.CAMERA_RGB)
    out = apply_wb(img, (2.0, 1.0, 0.5))
    assert np.allclose(out.data[0, 0], [0.4, 0.2, 0.1], atol=1e-15)


def test_wb_inverse_is_exact():
    img = constant((0.3, 0.5, 0.7), stage=Stage.CAMERA_RGB)
    gains = (1.9, 1.0, 1.4)
    back = apply_wb(apply_wb(img, gains), gains, inverse=True)
    assert np.abs(back.data - img.data).max() < 1e-12


def test_wb_unit_gains_identity():
    img = constant((0.3, 0.5, 0.7), stage=Stage.CAMERA_RGB)
    assert np.array_equal(apply_wb(img, (1.0, 1.0, 1.0)).data, img.data)


def test_wb_does_not_clip():
    img = constant(0.9, stage=Stage.CAMERA_RGB)
    assert apply_wb(img, (3.0, 3.0, 3.0)).data.max() == pytest.approx(2.7)


@given(
    st.tuples(*(st.floats(0.2, 5.0) for _ in range(3))),
    st.integers(0, 2 ** 32 - 1),
)
def test_wb_inverse_round_trip_property(gains, seed):
    data = np.random.default_rng(seed).random((4, 4, 3)) * 2.0
    img = Image(data, Stage.CAMERA_RGB)
    back = apply_wb(apply_wb(img, gains), gains, inverse=True)
    assert np.abs(back.data - img.data).max() < 1e-6


def test_wb_rejects_non_positive_gains():
    img = constant(0.5, stage=Stage.CAMERA_RGB)
    with pytest.raises(ConfigError):
        apply_wb(img, (0.0, 1.0, 1.0))
    with pytest.raises(ConfigError):
        apply_wb(img, (-1.0, 1.0, 1.0))


def test_ccm_identity_unchanged():
    img = constant((0.2, 0.5, 0.9), stage=Stage.CAMERA_RGB)
    assert np.array_equal(apply_ccm(img, np.eye(3)).data, img.data)


def test_ccm_forward_then_inverse_round_trip(rng):
    img = Image(rng.random((6, 6, 3)), Stage.CAMERA_RGB)
    from helpers import REALISTIC_CCM

    forward = apply_ccm(img, REALISTIC_CCM)
    assert forward.stage is Stage.LINEAR_SRGB
    back = apply_ccm(forward, REALISTIC_CCM, inverse=True)
    assert back.stage is Stage.CAMERA_RGB
    assert np.abs(back.data - img.data).max() < 1e-6


def test_ccm_pixel_is_matrix_column():
    ccm = np.array([[0.7, 0.2, 0.1], [0.15, 0.8, 0.05], [0.05, 0.1, 0.85]])
    img = constant((1.0, 0.0, 0.0), stage=Stage.CAMERA_RGB)
    out = apply_ccm(img, ccm)
    assert np.allclose(out.data[0, 0], ccm[:, 0], atol=1e-15)


def test_ccm_rejects_singular_matrix():
    singular = np.ones((3, 3))
    with pytest.raises(ConfigError):
        apply_ccm(constant(0.5, stage=Stage.CAMERA_RGB), singular)
    with pytest.raises(ConfigError):
        IspConfig(ccm=singular)


def test_ccm_stage_discipline():
    with pytest.raises(StageError):
        apply_ccm(constant(0.5, stage=Stage.SRGB), np.eye(3))
    with pytest.raises(StageError):
        apply_ccm(constant(0.5, stage=Stage.CAMERA_RGB), np.eye(3), inverse=True)


# --------------------------------------------------------------------------
# Mosaic and demosaic


@pytest.mark.parametrize("pattern", list(BayerPattern))
def test_mosaic_constant_follows_tile(pattern):
    img = constant((0.1, 0.5, 0.9), h=4, w=4, stage=Stage.CAMERA_RGB)
    raw = mosaic(img, pattern)
    tile = TILES[pattern]
    values = (0.1, 0.5, 0.9)
    for y in range(4):
        for x in range(4):
            assert raw.data[y, x] == values[tile[y % 2][x % 2]]


@pytest.mark.parametrize("pattern", list(BayerPattern))
def test_mosaic_matches_index_gather_oracle(pattern, rng):
    img = Image(rng.random((4, 4, 3)), Stage.CAMERA_RGB)
    raw = mosaic(img, pattern)
    tile = TILES[pattern]
    for y in range(4):
        for x in range(4):
            assert raw.data[y, x] == img.data[y, x, tile[y % 2][x % 2]]


def test_mosaic_requires_even_dims():
    with pytest.raises(ShapeError):
        mosaic(constant(0.5, h=3, w=4, stage=Stage.CAMERA_RGB), BayerPattern.RGGB)
    with pytest.raises(ShapeError):
        demosaic_bilinear(Image(np.zeros((4, 5)), Stage.BAYER_RAW), BayerPattern.RGGB)


@pytest.mark.parametrize("pattern", list(BayerPattern))
def test_mosaic_of_demosaic_is_identity(pattern, rng):
    raw = Image(rng.random((6, 8)), Stage.BAYER_RAW)
    rgb = demosaic_bilinear(raw, pattern)
    assert np.array_equal(mosaic(rgb, pattern).data, raw.data)


@pytest.mark.parametrize("pattern", list(BayerPattern))
def test_demosaic_of_constant_mosaic_is_exact(pattern):
    img = constant((0.25, 0.5, 0.75), h=6, w=6, stage=Stage.CAMERA_RGB)
    rgb = demosaic_bilinear(mosaic(img, pattern), pattern)
    assert np.array_equal(rgb.data, img.data)


def _reflect(i: int, n: int) -> int:
    if i < 0:
        return -i
    if i >= n:
        return 2 * n - 2 - i
    return i


def brute_force_demosaic(raw: np.ndarray, tile) -> np.ndarray:
    """Scan-based neighbor gather: for each missing channel, average the
    same-channel sites among the 8 neighbors, substituting the nearest
    same-channel in-bounds sample for out-of-bounds positions."""
    h, w = raw.shape
    out = np.zeros((h, w, 3))
    for y in range(h):
        for x in range(w):
            for c in range(3):
                if tile[y % 2][x % 2] == c:
                    out[y, x, c] = raw[y, x]
                    continue
                values = []
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        if dy == 0 and dx == 0:
                            continue
                        yy, xx = y + dy, x + dx
                        if tile[yy % 2][xx % 2] != c:
                            continue
                        values.append(raw[_reflect(yy, h), _reflect(xx, w)])
                out[y, x, c] = sum(values) / len(values)
    return out


@pytest.mark.parametrize("pattern", list(BayerPattern))
def test_demosaic_matches_brute_force_oracle_on_ramp(pattern):
    ramp = np.tile(np.linspace(0.0, 1.0, 6), (6, 1))
    raw = Image(ramp, Stage.BAYER_RAW)
    rgb = demosaic_bilinear(raw, pattern)
    expected = brute_force_demosaic(ramp, TILES[pattern])
    assert np.allclose(rgb.data, expected, atol=1e-12)


@pytest.mark.parametrize("pattern", list(BayerPattern))
def test_demosaic_matches_brute_force_oracle_on_random(pattern, rng):
    raw_data = rng.random((8, 10))
    rgb = demosaic_bilinear(Image(raw_data, Stage.BAYER_RAW), pattern)
    expected = brute_force_demosaic(raw_data, TILES[pattern])
    assert np.allclose(rgb.data, expected, atol=1e-12)


@given(
    st.sampled_from(list(BayerPattern)),
    st.integers(1, 5),
    st.integers(1, 5),
    st.integers(0, 2 ** 32 - 1),
)
def test_mosaic_of_demosaic_identity_property(pattern, half_h, half_w, seed):
    raw_data = np.random.default_rng(seed).random((2 * half_h, 2 * half_w))
    raw = Image(raw_data, Stage.BAYER_RAW)
    assert np.array_equal(mosaic(demosaic_bilinear(raw, pattern), pattern).data, raw_data)


def test_demosaic_preserves_sampled_sites(rng):
    raw = Image(rng.random((6, 6)), Stage.BAYER_RAW)
    rgb = demosaic_bilinear(raw, BayerPattern.RGGB)
    tile = TILES[BayerPattern.RGGB]
    for y in range(6):
        for x in range(6):
            assert rgb.data[y, x, tile[y % 2][x % 2]] == raw.data[y, x]


# --------------------------------------------------------------------------
# Composed ISP


def test_inverse_isp_with_identity_config_is_pure_mosaic(rng):
    img = Image(rng.random((6, 6, 3)), Stage.LINEAR_SRGB)
    raw = inverse_isp(img, default_isp())
    as_camera = Image(img.data, Stage.CAMERA_RGB)
    assert np.array_equal(raw.data, mosaic(as_camera, BayerPattern.RGGB).data)


def test_inverse_isp_divides_by_wb_gains():
    isp = IspConfig(wb_gains=(2.0, 2.0, 2.0))
    raw = inverse_isp(constant(0.5, h=4, w=4, stage=Stage.LINEAR_SRGB), isp)
    assert np.allclose(raw.data, 0.25, atol=1e-15)


def test_inverse_isp_does_not_clip():
    isp = IspConfig(wb_gains=(0.25, 0.25, 0.25))
    raw = inverse_isp(constant(0.9, h=4, w=4, stage=Stage.LINEAR_SRGB), isp)
    assert raw.data.max() == pytest.approx(3.6)


def test_forward_isp_identity_crf_on_constant_raw():
    isp = IspConfig(crf=GammaCrf(1.0))
    raw = bayer_constant(0.5, 4, 4)
    out = forward_isp(raw, isp)
    assert out.stage is Stage.SRGB
    assert np.array_equal(out.data, np.full((4, 4, 3), 0.5))


def test_forward_isp_output_clipped_to_unit_range():
    out = forward_isp(bayer_constant(1.7, 4, 4), default_isp())
    assert out.data.max() <= 1.0
    assert out.data.min() >= 0.0


@pytest.mark.parametrize("isp_builder", [default_isp, realistic_isp])
def test_forward_of_inverse_is_identity_on_constants(isp_builder, rng):
    isp = isp_builder()
    for _ in range(20):
        color = rng.random(3)
        lin = constant(color, h=6, w=6, stage=Stage.LINEAR_SRGB)
        out = forward_isp(inverse_isp(lin, isp), isp)
        ref = linear_to_srgb(lin, isp.crf)
        assert np.abs(out.data - ref.data).max() < 1e-6


@pytest.mark.parametrize("pattern", list(BayerPattern))
def test_full_isp_round_trip_for_every_pattern(pattern, rng):
    from helpers import REALISTIC_CCM

    isp = IspConfig(wb_gains=(1.9, 1.0, 1.4), ccm=REALISTIC_CCM,
                    crf=GammaCrf(2.2), bayer_pattern=pattern)
    color = rng.random(3)
    lin = constant(color, h=6, w=8, stage=Stage.LINEAR_SRGB)
    out = forward_isp(inverse_isp(lin, isp), isp)
    ref = linear_to_srgb(lin, isp.crf)
    assert np.abs(out.data - ref.data).max() < 1e-6


def test_round_trip_on_smooth_gradient_is_demosaic_limited(rng):
    h = w = 64
    ramp = np.linspace(0.05, 0.95, w)
    data = np.stack([np.tile(ramp, (h, 1))] * 3, axis=2)
    data[:, :, 1] = np.tile(np.linspace(0.1, 0.9, h)[:, None], (1, w))
    lin = Image(data, Stage.LINEAR_SRGB)
    isp = realistic_isp()
    out = forward_isp(inverse_isp(lin, isp), isp)
    ref = linear_to_srgb(lin, isp.crf)
    assert np.abs(out.data - ref.data).mean() < 1e-3
    interior = np.abs(out.data - ref.data)[2:-2, 2:-2, :]
    assert interior.max() < 1e-6  # linear ramps demosaic exactly away from borders


def test_forward_isp_wb_on_mosaic_equals_wb_after_demosaic(rng):
    # Per-site gains commute with per-channel interpolation.
    raw = Image(rng.random((8, 8)), Stage.BAYER_RAW)
    gains = (1.8, 1.0, 1.3)
    isp = IspConfig(wb_gains=gains, crf=GammaCrf(1.0))
    out = forward_isp(raw, isp)
    rgb = demosaic_bilinear(raw, BayerPattern.RGGB)
    alt = apply_wb(Image(rgb.data, Stage.CAMERA_RGB), gains)
    alt_clipped = np.clip(alt.data, 0.0, 1.0)
    assert np.allclose(out.data, alt_clipped, atol=1e-12)


def test_stage_tags_enforced_across_isp():
    with pytest.raises(StageError):
        inverse_isp(constant(0.5, stage=Stage.SRGB), default_isp())
    with pytest.raises(StageError):
        forward_isp(constant(0.5, stage=Stage.CAMERA_RGB), default_isp())


def test_isp_config_validation():
    with pytest.raises(ConfigError):
        IspConfig(wb_gains=(1.0, -2.0, 1.0))
    with pytest.raises(ConfigError):
        IspConfig(wb_gains=(1.0, 1.0))
    with pytest.raises(ConfigError):
        GammaCrf(0.0)
