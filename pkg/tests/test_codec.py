import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hierzip.codec import (
    Decoder,
    compress,
    compress_base,
    decompress_base,
    decompress_full,
    decompress_to_level,
    resolve_error_bound,
)
from hierzip.core import PARITIES, HierarchyLayout
from hierzip.exceptions import HierzipError, LayoutError
from hierzip.metrics import compression_ratio
from hierzip.synthetic import constant, gaussians, make, noise


def max_err(a, b):
    return float(np.abs(a.astype(np.float64) - b.astype(np.float64)).max())


def test_constant_field_codes_to_zeros():
    field = constant((64, 64, 64))
    archive = compress(field, 1e-3)
    assert compression_ratio(field.nbytes, archive.nbytes) > 100
    dec = Decoder(archive)
    for level in (2, 3):
        for p in PARITIES:
            s = dec.stream(level, p)
            assert not s.codes.any()
            assert s.outlier_index.size == 0
    assert np.array_equal(decompress_full(archive), field)


def test_cubic_beats_direct(smooth64):
    direct = compress(smooth64, 1e-3, quality="direct").nbytes
    cubic = compress(smooth64, 1e-3, quality="cubic").nbytes
    assert cubic < direct


@pytest.mark.parametrize("eb", [1e-1, 1e-2, 1e-4])
def test_abs_bound_on_random_fields(eb):
    for seed in range(10):
        field = gaussians((24, 20, 28), seed=seed).astype(np.float64)
        field += 0.02 * np.random.default_rng(seed).standard_normal(field.shape)
        recon = decompress_full(compress(field, eb, mode="abs"))
        assert max_err(field, recon) <= eb


def test_relative_bound_resolution(smooth64):
    eb_abs, vmin, vmax, degenerate = resolve_error_bound(smooth64, 1e-3, "rel")
    assert vmin == float(smooth64.min()) and vmax == float(smooth64.max())
    assert eb_abs == pytest.approx(1e-3 * (vmax - vmin), rel=1e-15)
    assert not degenerate
    with pytest.raises(HierzipError):
        resolve_error_bound(smooth64, 1e-3, "percent")
    with pytest.raises(HierzipError):
        resolve_error_bound(smooth64, -1.0, "abs")


def test_header_records_schedule(smooth64):
    archive = compress(smooth64, 1e-2, levels=3)
    h = archive.header
    eb_abs = resolve_error_bound(smooth64, 1e-2, "rel")[0]
    assert h.eb_schedule == pytest.approx((eb_abs / 6.25, eb_abs / 2.5, eb_abs), rel=1e-15)
    assert h.dims == (64, 64, 64) and h.levels == 3 and h.quality == "cubic"
    uniform = compress(smooth64, 1e-2, adaptive=False).header
    assert uniform.eb_schedule == (eb_abs,) * 3


def test_encoder_reconstruction_equals_decoder(odd_field):
    for levels in (2, 3):
        archive, recon = compress(odd_field, 1e-3, levels=levels, return_reconstruction=True)
        assert np.array_equal(decompress_full(archive), recon)


def test_levels_two(odd_field):
    archive = compress(odd_field, 1e-2, levels=2)
    recon = decompress_full(archive)
    assert recon.shape == odd_field.shape and recon.dtype == odd_field.dtype
    assert max_err(odd_field, recon) <= archive.header.eb_user
    assert len(archive.directory) == 7


@pytest.mark.parametrize("levels", [2, 3])
def test_progressive_matches_subsampled_full(odd_field, levels):
    archive = compress(odd_field, 1e-3, levels=levels)
    full = decompress_full(archive)
    for level in range(1, levels + 1):
        step = 2 ** (levels - level)
        part = decompress_to_level(archive, level)
        assert np.array_equal(part, full[::step, ::step, ::step])


def test_level_one_touches_only_base(smooth64):
    archive = compress(smooth64, 1e-3)
    dec = Decoder(archive)
    grid = dec.full_level(1)
    assert grid.shape == (16, 16, 16)
    assert grid.size * 64 == smooth64.size
    assert dec.stats.streams_decoded == {}
    with pytest.raises(HierzipError):
        decompress_to_level(archive, 4)


def test_idempotent_recompression(odd_field):
    archive = compress(odd_field, 1e-3, mode="abs")
    once = decompress_full(archive)
    twice = decompress_full(compress(once, 1e-3, mode="abs"))
    assert max_err(once, twice) <= 1e-3
    assert max_err(odd_field, twice) <= 2e-3


def test_float32_native_precision():
    field = noise((17, 16, 19), seed=4, dtype=np.float32) * np.float32(1e4)
    archive = compress(field, 1e-7, mode="rel")
    recon = decompress_full(archive)
    assert recon.dtype == np.float32
    assert max_err(field, recon) <= archive.header.eb_user


def test_degenerate_relative_range_is_lossless():
    field = constant((8, 9, 10), value=-3.25, dtype=np.float64)
    archive = compress(field, 1e-3, mode="rel")
    assert archive.header.degenerate
    assert np.array_equal(decompress_full(archive), field)


def test_non_finite_values_survive():
    field = gaussians((12, 12, 12), seed=2)
    field[3, 4, 5] = np.nan
    field[0, 0, 0] = np.inf
    archive = compress(field, 1e-3, mode="abs")
    recon = decompress_full(archive)
    assert np.isnan(recon[3, 4, 5]) and recon[0, 0, 0] == np.inf
    mask = np.isfinite(field)
    assert max_err(field[mask], recon[mask]) <= 1e-3


def test_layout_errors():
    with pytest.raises(LayoutError):
        compress(np.zeros((3, 8, 8), np.float32), 1e-3, levels=3)
    with pytest.raises(HierzipError):
        compress(np.zeros((8, 8), np.float32), 1e-3)
    with pytest.raises(HierzipError):
        compress(np.zeros((8, 8, 8), np.int32), 1e-3)
    with pytest.raises(HierzipError):
        compress(np.zeros((8, 8, 8), np.float32), 1e-3, quality="quintic")


def test_thread_count_does_not_change_bytes(odd_field):
    one = compress(odd_field, 1e-3, n_threads=1).to_bytes()
    many = compress(odd_field, 1e-3, n_threads=4).to_bytes()
    assert one == many
    assert np.array_equal(decompress_full(one, n_threads=4), decompress_full(one))


def test_base_anchor_is_verbatim():
    block = np.random.default_rng(0).standard_normal((2, 2, 2))
    payload, recon = compress_base(block, 1e-6)
    assert np.array_equal(recon, block)
    assert np.array_equal(decompress_base(payload, np.float64, 1e-6), block)


def test_base_sixteen_cube_runs_one_round():
    block = gaussians((16, 16, 16), seed=9).astype(np.float64)
    payload, recon = compress_base(block, 1e-4)
    # 8^3 verbatim anchor, then seven coded sub-blocks
    assert payload[24] == 1
    assert np.array_equal(recon[::2, ::2, ::2], block[::2, ::2, ::2])
    assert max_err(block, recon) <= 1e-4
    assert np.array_equal(decompress_base(payload, np.float64, 1e-4), recon)


@settings(max_examples=25, deadline=None)
@given(
    shape=st.tuples(*[st.integers(2, 40)] * 3),
    eb=st.sampled_from([1e-1, 1e-3, 1e-5]),
    quality=st.sampled_from(["direct", "linear", "cubic"]),
    seed=st.integers(0, 100),
)
def test_base_round_trip_property(shape, eb, quality, seed):
    block = make("gaussians", shape, seed=seed, dtype=np.float64)
    payload, recon = compress_base(block, eb, quality)
    assert max_err(block, recon) <= eb
    assert np.array_equal(decompress_base(payload, np.float64, eb, quality), recon)


def test_shapes_near_the_minimum():
    rng = np.random.default_rng(1)
    for shape in [(8, 8, 8), (9, 8, 11), (8, 13, 8)]:
        field = rng.standard_normal(shape)
        archive = compress(field, 1e-2, mode="abs", levels=3)
        assert max_err(field, decompress_full(archive)) <= 1e-2
        layout = HierarchyLayout(shape, 3)
        assert decompress_to_level(archive, 1).shape == layout.grid_dims(1)
