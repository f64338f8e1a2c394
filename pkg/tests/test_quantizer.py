import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from hierzip.exceptions import HierzipError, LayoutError
from hierzip.quantizer import (
    RADIUS,
    SENTINEL,
    dequantize,
    eb_schedule,
    quantize,
    quantize_block,
    reconstruct,
)


@pytest.mark.parametrize(
    "eb, levels, expected",
    [
        (1e-2, 2, (4e-3, 1e-2)),
        (1e-2, 3, (1.6e-3, 4e-3, 1e-2)),
        (1.0, 2, (0.4, 1.0)),
    ],
)
def test_schedule_examples(eb, levels, expected):
    assert eb_schedule(eb, levels) == pytest.approx(expected, rel=1e-15)


def test_schedule_finest_is_user_bound_and_max():
    for levels in (1, 2, 3, 4):
        sched = eb_schedule(0.37, levels)
        assert sched[-1] == 0.37
        assert max(sched) == 0.37
        assert all(b / a == pytest.approx(2.5) for a, b in zip(sched, sched[1:]))


def test_uniform_schedule():
    assert eb_schedule(0.5, 3, adaptive=False) == (0.5, 0.5, 0.5)


@pytest.mark.parametrize("eb", [0.0, -1.0, math.inf, math.nan])
def test_schedule_rejects_bad_bound(eb):
    with pytest.raises(LayoutError):
        eb_schedule(eb, 2)


def test_quantize_examples():
    assert quantize(0.0, 0.123) == 0
    assert quantize(0.25, 0.1) == 1
    assert dequantize(1, 0.1) == pytest.approx(0.2)
    assert abs(0.25 - dequantize(quantize(0.25, 0.1), 0.1)) <= 0.1
    assert quantize(1e6, 1e-3) is None


def test_quantize_rounds_half_away_from_zero():
    # 0.75 / (2 * 0.25) is exactly 1.5
    assert quantize(0.75, 0.25) == 2
    assert quantize(-0.75, 0.25) == -2
    assert quantize(0.25, 0.25) == 1
    assert quantize(-0.25, 0.25) == -1


def test_quantize_radius_edge():
    eb = 0.5
    assert quantize(float(RADIUS), eb) == RADIUS
    assert quantize(-float(RADIUS), eb) == -RADIUS
    assert quantize(float(RADIUS) + 1.0, eb) is None


@pytest.mark.parametrize("diff", [math.nan, math.inf, -math.inf])
def test_non_finite_residual_is_outlier(diff):
    assert quantize(diff, 0.1) is None


def test_dequantize_examples():
    assert dequantize(0, 0.7) == 0.0
    assert dequantize(-3, 0.1) == pytest.approx(-0.6)
    with pytest.raises(HierzipError):
        dequantize(SENTINEL, 0.1)


def test_quantize_inverts_dequantize_over_whole_alphabet():
    eb = 0.01
    codes = range(-RADIUS, RADIUS + 1)
    assert all(quantize(dequantize(c, eb), eb) == c for c in codes)


def test_million_random_diffs_within_bound(rng):
    eb = 1e-3
    diff = rng.uniform(-60.0, 60.0, size=1_000_000)
    stream, recon = quantize_block(diff, np.zeros_like(diff), eb)
    inliers = stream.codes != SENTINEL
    assert inliers.mean() > 0.99
    assert np.abs(diff - recon).max() <= eb
    assert np.all(np.abs(stream.codes[inliers]) <= RADIUS)
    # outliers reconstruct exactly
    assert np.array_equal(recon[~inliers], diff[~inliers])
    # vectorized codes agree with the scalar quantizer
    for i in rng.integers(0, diff.size, 2000):
        q = quantize(float(diff[i]), eb)
        assert (SENTINEL if q is None else q) == stream.codes[i]


def test_block_outliers_are_listed_in_flat_order():
    orig = np.array([[[0.0, 1e9, 0.1, -1e9]]])
    stream, recon = quantize_block(orig, np.zeros_like(orig), 0.01)
    assert stream.outlier_index.tolist() == [1, 3]
    assert stream.outlier_values.tolist() == [1e9, -1e9]
    assert stream.codes.reshape(-1)[[1, 3]].tolist() == [SENTINEL, SENTINEL]
    assert np.array_equal(recon[0, 0, [1, 3]], orig[0, 0, [1, 3]])


def test_block_non_finite_values_are_kept_verbatim():
    orig = np.array([np.nan, np.inf, 1.0], dtype=np.float32)
    stream, recon = quantize_block(orig, np.zeros(3), 0.1)
    assert stream.outlier_index.tolist() == [0, 1]
    assert np.isnan(recon[0]) and recon[1] == np.inf
    assert recon.dtype == np.float32


def test_zero_bound_keeps_only_exact_predictions():
    orig = np.array([1.0, 2.0, 3.0])
    pred = np.array([1.0, 2.5, 3.0])
    stream, recon = quantize_block(orig, pred, 0.0)
    assert stream.codes.tolist() == [0, SENTINEL, 0]
    assert np.array_equal(recon, orig)


def test_reconstruct_matches_dequantize():
    codes = np.array([-5, 0, 3, SENTINEL], dtype=np.int32)
    pred = np.array([1.0, 2.0, 3.0, 4.0])
    out = reconstruct(pred, codes, 0.05, np.float64)
    expected = [p + dequantize(int(c), 0.05) for p, c in zip(pred[:3], codes[:3])]
    assert out[:3].tolist() == expected


@settings(max_examples=60, deadline=None)
@given(
    orig=hnp.arrays(
        np.float32,
        st.integers(1, 200),
        elements=st.floats(-1e6, 1e6, width=32, allow_nan=False),
    ),
    shift=st.floats(-10.0, 10.0),
    eb=st.floats(1e-7, 10.0),
)
def test_block_bound_holds_in_native_precision(orig, shift, eb):
    pred = orig.astype(np.float64) + shift
    stream, recon = quantize_block(orig, pred, eb)
    assert recon.dtype == np.float32
    assert np.all(np.abs(orig.astype(np.float64) - recon.astype(np.float64)) <= eb)
    again = reconstruct(pred, stream.codes, eb, np.float32)
    again.reshape(-1)[stream.outlier_index] = stream.outlier_values
    assert np.array_equal(again, recon)
