from __future__ import annotations

import numpy as np
import pytest

from screen_interventions.core import Detection, DimensionError, Region
from screen_interventions.imaging.gray import GrayImage, contourize, resize_nearest, resize_rgba, scaled_size
from screen_interventions.imaging.hashing import average_hash, hamming
from screen_interventions.imaging.matching import (
    DEFAULT_SCALES,
    MatchConfig,
    MatchMode,
    agrees,
    match_multiscale,
    ncc_match,
    non_max_suppression,
    scale_ladder,
)


def _textured(h: int, w: int, seed: int = 0) -> np.ndarray:
    return np.random.default_rng(seed).integers(0, 256, size=(h, w), dtype=np.uint8)


def _brute_ssd_argmin(image: np.ndarray, tpl: np.ndarray):
    th, tw = tpl.shape
    best, where = None, None
    for y in range(image.shape[0] - th + 1):
        for x in range(image.shape[1] - tw + 1):
            d = int(((image[y : y + th, x : x + tw].astype(np.int64) - tpl) ** 2).sum())
            if best is None or d < best:
                best, where = d, (y, x)
    return where


def test_default_ladder_is_anchored_at_one():
    assert DEFAULT_SCALES[0] == 0.5132
    assert DEFAULT_SCALES[-1] == 1.9487
    assert len(DEFAULT_SCALES) == 15
    assert 1.0 in DEFAULT_SCALES and 1.1 in DEFAULT_SCALES
    assert scale_ladder(1.2, 2.0, 1.1)[0] == 1.21
    assert all(b / a == pytest.approx(1.1, abs=1e-3) for a, b in zip(DEFAULT_SCALES, DEFAULT_SCALES[1:]))
    with pytest.raises(ValueError):
        scale_ladder(1.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        scale_ladder(1.02, 1.05, 1.1)


def test_match_config_validation():
    with pytest.raises(ValueError):
        MatchConfig(scales=())
    with pytest.raises(ValueError):
        MatchConfig(scales=(1.0, 0.5))
    with pytest.raises(ValueError):
        MatchConfig(score_threshold=1.5)
    with pytest.raises(ValueError):
        MatchConfig(refine_steps=-1)


def test_ncc_peak_agrees_with_exhaustive_ssd():
    image = _textured(30, 40, seed=3)
    tpl = image[11:19, 22:31].copy()
    scores = ncc_match(GrayImage(image), GrayImage(tpl))
    assert scores.shape == (30 - 8 + 1, 40 - 9 + 1)
    peak = np.unravel_index(np.argmax(scores), scores.shape)
    assert tuple(int(v) for v in peak) == _brute_ssd_argmin(image, tpl) == (11, 22)
    assert scores[11, 22] == pytest.approx(1.0)


def test_ncc_rejects_oversized_template():
    with pytest.raises(DimensionError):
        ncc_match(GrayImage(np.zeros((5, 5))), GrayImage(np.zeros((6, 2))))


def test_ncc_flat_windows_score_half_or_zero():
    image = np.full((10, 10), 200, dtype=np.uint8)
    scores = ncc_match(GrayImage(image), GrayImage(np.full((3, 3), 200, dtype=np.uint8)))
    assert (scores == 0.5).all()
    scores = ncc_match(GrayImage(image), GrayImage(np.full((3, 3), 20, dtype=np.uint8)))
    assert (scores == 0.0).all()


def test_resize_index_mapping_shared_by_gray_and_rgba():
    px = np.random.default_rng(1).integers(0, 256, size=(13, 17, 4), dtype=np.uint8)
    for s in (0.5, 0.8053, 1.179, 1.8987):
        gray = resize_nearest(GrayImage(px[..., 0]), s)
        rgba = resize_rgba(px, s)
        assert (gray.width, gray.height) == scaled_size(17, 13, s)
        assert np.array_equal(gray.data, rgba[..., 0])


def test_template_found_at_planted_scale():
    tpl = _textured(12, 16, seed=5)
    scale = 1.4641
    planted = resize_nearest(GrayImage(tpl), scale).data
    image = np.full((80, 90), 255, dtype=np.uint8)
    image[30 : 30 + planted.shape[0], 20 : 20 + planted.shape[1]] = planted
    found = match_multiscale(GrayImage(image), [GrayImage(tpl)], MatchConfig(), labels=["tile"])
    best = found[0]
    assert best.region == Region(20, 30, planted.shape[1], planted.shape[0])
    assert best.scale == scale
    assert best.score == pytest.approx(1.0)


def _blocks() -> np.ndarray:
    tpl = np.full((24, 32), 230, dtype=np.uint8)
    tpl[4:12, 4:14] = 30
    tpl[14:20, 18:28] = 120
    tpl[2:6, 20:30] = 60
    return tpl


def _planted(tpl: np.ndarray, scale: float, x: int = 25, y: int = 30) -> np.ndarray:
    planted = resize_nearest(GrayImage(tpl), scale).data
    image = np.full((120, 140), 255, dtype=np.uint8)
    image[y : y + planted.shape[0], x : x + planted.shape[1]] = planted
    return image


def test_template_found_between_ladder_rungs():
    image = _planted(_blocks(), 1.25)
    truth = Region(25, 30, *scaled_size(32, 24, 1.25))
    found = match_multiscale(GrayImage(image), [GrayImage(_blocks())])
    assert found[0].region.iou(truth) >= 0.9
    assert found[0].scale == pytest.approx(1.25, rel=0.02)
    assert found[0].score >= 0.9


def test_ladder_scale_kept_when_it_matches_exactly():
    image = _planted(_blocks(), 1.25)
    found = match_multiscale(GrayImage(image), [GrayImage(_blocks())], MatchConfig(scales=(0.8, 1.0, 1.25, 1.5)))
    assert found[0].scale == 1.25
    assert found[0].region == Region(25, 30, 40, 30)
    exact = match_multiscale(
        GrayImage(image), [GrayImage(_blocks())], MatchConfig(scales=(0.8, 1.0, 1.25, 1.5), refine_steps=0)
    )
    assert (exact[0].region, exact[0].scale) == (Region(25, 30, 40, 30), 1.25)


def test_agreement_rejects_correlated_but_different_windows():
    tpl = GrayImage(_blocks())
    assert agrees(tpl, tpl, MatchMode.COLOR)
    assert agrees(GrayImage(_blocks() // 2 + 100), tpl, MatchMode.COLOR)
    missing = _blocks()
    missing[4:12, 4:14] = 230
    assert not agrees(GrayImage(missing), tpl, MatchMode.COLOR)

    bright = 255 - _blocks()
    edges = GrayImage(bright)
    assert agrees(GrayImage(np.roll(bright, 1, axis=1)), edges, MatchMode.CONTOUR)
    assert not agrees(GrayImage(np.roll(bright, 3, axis=1)), edges, MatchMode.CONTOUR)
    with pytest.raises(DimensionError):
        agrees(GrayImage(_blocks()[:10]), tpl, MatchMode.COLOR)


def test_no_detection_below_threshold():
    image = _textured(60, 60, seed=8)
    tpl = _textured(10, 10, seed=9)
    assert match_multiscale(GrayImage(image), [GrayImage(tpl)], MatchConfig(scales=(1.0,), score_threshold=0.95)) == []


def test_contour_mode_ignores_colour_changes():
    shape = np.zeros((20, 20), dtype=np.uint8)
    shape[4:16, 4:16] = 220
    shape[8:12, 8:12] = 0
    recoloured = np.where(shape > 0, 160, 10).astype(np.uint8)
    image = np.full((60, 60), 10, dtype=np.uint8)
    image[25:45, 30:50] = recoloured
    cfg = MatchConfig(scales=(1.0,), mode=MatchMode.CONTOUR)
    found = match_multiscale(GrayImage(image), [GrayImage(shape)], cfg)
    assert found and found[0].region == Region(30, 25, 20, 20)


def test_contourize_is_erosion_difference():
    img = np.zeros((9, 9), dtype=np.uint8)
    img[2:7, 2:7] = 255
    edges = contourize(GrayImage(img)).data
    expected = np.zeros_like(img)
    expected[2:7, 2:7] = 255
    expected[3:6, 3:6] = 0
    assert np.array_equal(edges, expected)


def test_nms_keeps_first_of_overlapping():
    a = Detection(Region(0, 0, 10, 10), 0.9)
    b = Detection(Region(1, 1, 10, 10), 0.95)
    c = Detection(Region(40, 40, 10, 10), 0.8)
    assert non_max_suppression([a, b, c], 0.3) == [a, c]


def test_average_hash_and_hamming():
    img = np.zeros((16, 16), dtype=np.uint8)
    img[:, 8:] = 255
    h = average_hash(GrayImage(img))
    assert bin(h).count("1") == 32
    assert average_hash(GrayImage(np.full((8, 8), 9, dtype=np.uint8))) == 0
    assert hamming(0b1011, 0b0001) == 2
