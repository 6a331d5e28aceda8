from __future__ import annotations

import pytest

from screen_interventions.core import DimensionError
from screen_interventions.corpus.generate import Layout, generate_scroll_sequence, random_spec
from screen_interventions.imaging.scroll import ScrollConfig, detect_scroll

from .conftest import solid


@pytest.fixture(scope="module")
def feed_spec():
    return random_spec(101, Layout.FEED, width=240, height=320)


def test_identical_frames_do_not_scroll(feed_spec):
    frame = generate_scroll_sequence(feed_spec, [])[0]
    assert detect_scroll(frame, frame) is None


@pytest.mark.parametrize("shift", [37, -37, 64, 1])
def test_detects_planted_shift(feed_spec, shift):
    prev, cur = generate_scroll_sequence(feed_spec, [shift])
    assert detect_scroll(prev, cur) == shift


def test_flat_frames_do_not_scroll():
    assert detect_scroll(solid(120, 200), solid(120, 200)) is None


def test_size_mismatch_is_rejected():
    with pytest.raises(DimensionError):
        detect_scroll(solid(10, 10), solid(10, 12))


def test_shift_beyond_window_is_not_reported(feed_spec):
    prev, cur = generate_scroll_sequence(feed_spec, [150])
    assert detect_scroll(prev, cur, search_window=40) != 150


def test_scroll_config_validation():
    with pytest.raises(ValueError):
        ScrollConfig(strip_height=0)
    with pytest.raises(ValueError):
        ScrollConfig(history=0)
