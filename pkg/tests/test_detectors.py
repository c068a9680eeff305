import colorsys
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from specrem.detect_hsv import (
    HsvDetectorParams,
    ThresholdMode,
    cost_map,
    detect_hsv,
    hue_term,
    saturation_term,
    threshold_cost,
    top_fraction,
    value_term,
)
from specrem.detect_rgb import RgbDetectorParams, channel_threshold, detect_rgb
from specrem.errors import UsageError
from specrem.imagecore import ColorSpace, RasterImage, rgb_to_hsv

unit = st.floats(0.0, 1.0, allow_nan=False)


# RGB detector -----------------------------------------------------------


def test_channel_threshold_constant_is_empty():
    for k in (0.0, 1.0, 4.5):
        assert not channel_threshold(np.full((8, 8), 0.3), k).any()


def test_channel_threshold_single_outlier():
    chan = np.full((16, 16), 0.1)
    chan[5, 7] = 1.0
    # hand statistics: mean 0.1 + 0.9/256, population std 0.9 * sqrt(255) / 256
    mu = 0.1 + 0.9 / 256
    sigma = 0.9 * math.sqrt(255) / 256
    assert mu == pytest.approx(0.10352, abs=1e-5)
    assert sigma == pytest.approx(0.05614, abs=1e-5)
    assert mu + 4.5 * sigma == pytest.approx(0.3561, abs=1e-4)
    out = channel_threshold(chan, 4.5)
    assert out.sum() == 1 and out[5, 7]


def test_channel_threshold_k_zero_half_half():
    chan = np.zeros((4, 4))
    chan[2:] = 1.0
    assert np.array_equal(channel_threshold(chan, 0.0), chan == 1.0)


def _img(rgb):
    return RasterImage(np.asarray(rgb, dtype=float))


def test_two_of_three_vote():
    base = np.full((16, 16, 3), 0.2)
    base[3, 3, 0] = 1.0  # one vote
    base[9, 9, :2] = 1.0  # two votes
    out = detect_rgb(_img(base))
    assert out[9, 9] and not out[3, 3]
    assert out.sum() == 1


def test_dark_frame_white_pixel():
    base = np.full((16, 16, 3), 0.1)
    base[4, 11] = 1.0
    out = detect_rgb(_img(base))
    assert out.sum() == 1 and out[4, 11]


def test_rgb_params_validation():
    with pytest.raises(ValueError):
        RgbDetectorParams(-1.0)
    with pytest.raises(ValueError):
        RgbDetectorParams(float("inf"))


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (6, 7, 3), elements=unit), st.floats(0, 3), st.floats(0, 3))
def test_rgb_vote_oracle_monotone_and_symmetric(data, k1, k2):
    img = _img(data)
    lo, hi = sorted((k1, k2))
    out = detect_rgb(img, RgbDetectorParams(lo))
    votes = np.zeros(data.shape[:2], int)
    for ch in range(3):
        vals = data[..., ch].ravel().tolist()
        if max(vals) == min(vals):
            continue
        m = sum(vals) / len(vals)
        s = math.sqrt(sum((v - m) ** 2 for v in vals) / len(vals))
        # skip samples too close to the cut for the two summation orders to agree
        cut = m + lo * s
        if np.any(np.abs(data[..., ch] - cut) < 1e-12):
            return
        votes += data[..., ch] > cut
    assert np.array_equal(out, votes >= 2)
    assert np.all(detect_rgb(img, RgbDetectorParams(hi)) <= out)
    assert np.array_equal(detect_rgb(_img(data[..., [2, 0, 1]]), RgbDetectorParams(lo)), out)


# HSV terms --------------------------------------------------------------


def test_hue_term_examples():
    assert not hue_term(np.full((5, 5), 0.3)).any()
    # edge replication gives a full 0/0.5 board the same variance everywhere
    board = 0.5 * (np.indices((6, 6)).sum(axis=0) % 2)
    assert not hue_term(board).any()
    # embedded in a flat field, the board's interior reaches the maximum
    field = np.zeros((10, 10))
    field[2:8, 2:8] = board
    term = hue_term(field)
    ref = oracles.minmax(oracles.variance_3x3(field.tolist()))
    assert np.allclose(term, ref, atol=1e-12)
    assert np.all(term[3:7, 3:7] == 1.0)
    assert term[:, :2].max() < 1.0 and term[:, 8:].max() < 1.0

    single = np.full((7, 7), 0.2)
    single[3, 3] = 0.6
    term = hue_term(single)
    peak = np.argwhere(term == term.max())
    assert np.all(np.abs(peak - [3, 3]).max(axis=1) <= 1)
    assert not term[np.abs(np.indices((7, 7)) - 3).max(axis=0) > 2].any()


def test_saturation_and_value_terms():
    assert np.all(saturation_term(np.full((3, 3), 0.4)) == 1.0)
    assert np.all(value_term(np.full((3, 3), 0.4)) == 1.0)
    half = np.array([[0.0, 0.0], [1.0, 1.0]])
    assert saturation_term(half).tolist() == [[2.0, 2.0], [0.0, 0.0]]
    assert value_term(half).tolist() == [[0.0, 0.0], [2.0, 2.0]]
    dark = np.full((5, 5), 0.8)
    dark[0, 0] = 0.0
    assert value_term(dark)[0, 0] == 0.0
    grey = np.full((5, 5), 0.1)
    grey[0, 0] = 1.0
    assert saturation_term(grey)[0, 0] == 0.0


def test_cost_map_constant_and_annihilation():
    const = RasterImage(np.full((5, 5, 3), 0.5), ColorSpace.HSV)
    assert np.all(cost_map(const) == 1.0)

    # top half: S = 1, V high -> z(-S) = -1 so the saturation term is 0;
    # bottom half: S = 0, V low -> z(V) = -1 so the value term is 0
    rng = np.random.default_rng(1)
    hsv = rng.random((6, 6, 3))
    top = np.indices((6, 6))[0] < 3
    hsv[..., 1] = np.where(top, 1.0, 0.0)
    hsv[..., 2] = np.where(top, 0.7, 0.2)
    assert np.allclose(cost_map(RasterImage(hsv, ColorSpace.HSV)), hue_term(hsv[..., 0]))


def test_cost_map_requires_hsv():
    with pytest.raises(UsageError):
        cost_map(RasterImage(np.zeros((2, 2, 3))))


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (8, 8, 3), elements=unit))
def test_cost_map_matches_elementwise_oracle(hsv):
    hsv[..., 0] = np.minimum(hsv[..., 0], 0.999)
    ours = cost_map(RasterImage(hsv, ColorSpace.HSV))
    ref = np.array(oracles.cost_map([[tuple(p) for p in row] for row in hsv]))
    assert np.all(ours >= 0)
    assert np.allclose(ours, ref, atol=1e-9, rtol=0)


# thresholding -----------------------------------------------------------


def test_threshold_constant_fixedk_is_empty():
    assert not threshold_cost(np.full((10, 10), 1.0)).any()


def test_percentile_selects_exact_count():
    rng = np.random.default_rng(0)
    cost = rng.permutation(10_000).reshape(100, 100).astype(float)
    out = threshold_cost(cost, HsvDetectorParams(mode=ThresholdMode.PERCENTILE))
    assert out.sum() == 60
    assert cost[out].min() > cost[~out].max()


def test_percentile_ties_go_to_lower_index():
    cost = np.zeros((4, 5))
    cost[1, 1] = cost[2, 2] = cost[3, 3] = 5.0
    out = top_fraction(cost, 0.1)  # floor(2.0) = 2
    assert np.argwhere(out).tolist() == [[1, 1], [2, 2]]
    flat = top_fraction(np.ones((2, 5)), 0.3)
    assert np.flatnonzero(flat).tolist() == [0, 1, 2]


def test_percentile_too_small_warns_and_is_empty():
    with pytest.warns(RuntimeWarning):
        out = top_fraction(np.arange(10.0), 0.05)
    assert not out.any()


def test_percentile_count_is_floor():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert top_fraction(np.arange(100.0), 0.29).sum() == 29
        assert top_fraction(np.arange(7.0), 0.5).sum() == 3


@pytest.mark.parametrize("kwargs", [
    {"k": float("nan")},
    {"pixel_fraction": 0.0},
    {"pixel_fraction": 1.0},
    {"mode": "bogus"},
])
def test_hsv_params_validation(kwargs):
    with pytest.raises(ValueError):
        HsvDetectorParams(**kwargs)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (10, 10), elements=st.floats(0, 10, allow_nan=False)))
def test_fixedk_monotone(cost):
    masks = [threshold_cost(cost, HsvDetectorParams(k=k)) for k in (4.45, 4.5, 4.55)]
    assert np.all(masks[1] <= masks[0]) and np.all(masks[2] <= masks[1])


# full detector ----------------------------------------------------------


def test_detect_hsv_gray_frame_and_shape():
    gray = RasterImage(np.full((9, 11, 3), 0.4))
    out = detect_hsv(gray)
    assert out.shape == (9, 11) and not out.any()


def _reddish_with_blob():
    rng = np.random.default_rng(7)
    rgb = np.zeros((16, 16, 3))
    rgb[..., 0] = 0.45 + 0.05 * rng.random((16, 16))
    rgb[..., 1] = 0.15 + 0.03 * rng.random((16, 16))
    rgb[..., 2] = 0.10 + 0.03 * rng.random((16, 16))
    rgb[6:8, 9:11] = 0.98
    return rgb


def test_detect_hsv_white_blob_dominates_cost():
    rgb = _reddish_with_blob()
    img = RasterImage(rgb)
    hsv = [[colorsys.rgb_to_hsv(*p) for p in row] for row in rgb]
    ref = np.array(oracles.cost_map(hsv))
    ours = cost_map(rgb_to_hsv(img))
    assert np.allclose(ours, ref, atol=1e-9)
    blob = np.zeros((16, 16), bool)
    blob[6:8, 9:11] = True
    assert ref[blob].min() > ref[~blob].max()
    top4 = threshold_cost(ours, HsvDetectorParams(mode="percentile", pixel_fraction=4 / 256))
    assert np.array_equal(top4, blob)
    assert np.array_equal(detect_hsv(img), blob)
