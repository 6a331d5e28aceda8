from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from screen_interventions.core import Region
from screen_interventions.corpus.elements import MOSAIC_MAX_RED, THEMES, ElementKind, mosaic_colors
from screen_interventions.corpus.generate import (
    FRAME_INTERVAL_US,
    ElementSpec,
    Layout,
    ScreenSpec,
    SpecError,
    generate_scroll_sequence,
    generate_screen,
    random_spec,
    render_pixels,
    rng_for,
)
from screen_interventions.corpus.manifest import (
    GROUND_TRUTH_NAME,
    load_frames,
    load_manifest,
    load_png,
    read_ground_truth,
    save_png,
    write_corpus,
    write_manifest,
    write_masks,
)

MANIFEST = Path(__file__).resolve().parents[1] / "data" / "corpus_manifest.csv"


def test_same_seed_same_bytes():
    a, ta = generate_screen(random_spec(11))
    b, tb = generate_screen(random_spec(11))
    c, _ = generate_screen(random_spec(12))
    assert a == b and ta == tb
    assert a.data != c.data


def test_rng_streams_are_independent():
    x = rng_for(5, 0).integers(0, 1 << 30, size=4)
    assert np.array_equal(x, rng_for(5, 0).integers(0, 1 << 30, size=4))
    assert not np.array_equal(x, rng_for(5, 1).integers(0, 1 << 30, size=4))
    assert not np.array_equal(x, rng_for(6, 0).integers(0, 1 << 30, size=4))


@pytest.mark.parametrize("layout", list(Layout))
@pytest.mark.parametrize("theme", sorted(THEMES))
def test_random_layouts_are_valid(layout, theme):
    for seed in range(3):
        spec = random_spec(seed, layout, theme=theme)
        spec.check()
        assert spec.elements
        render_pixels(spec)


def test_kinds_restrict_planted_elements():
    spec = random_spec(61, Layout.MIXED, kinds=[ElementKind.TEXT, ElementKind.IMAGE_BLOCK])
    assert {el.kind for el in spec.elements} <= {ElementKind.TEXT, ElementKind.IMAGE_BLOCK}


def test_stories_ground_truth_matches_pixels():
    spec = random_spec(21, Layout.STORIES)
    frame, truth = generate_screen(spec)
    (bar,) = truth.of_kind(ElementKind.STORIES_BAR)
    ring = np.all(frame.rgba()[..., :3] == THEMES["twitter"].ring, axis=-1)
    ys, xs = np.nonzero(ring)
    inked = Region(int(xs.min()), int(ys.min()), int(xs.max() - xs.min()) + 1, int(ys.max() - ys.min()) + 1)
    assert bar.rect.contains(inked)


def test_text_ground_truth_is_ordered_and_transcribed():
    spec = random_spec(31, Layout.SETTINGS)
    _, truth = generate_screen(spec)
    texts = truth.text_entries()
    assert texts[0].transcript == "SETTINGS"
    assert [e.text_rect.y for e in texts] == sorted(e.text_rect.y for e in texts)


def _spec(*elements):
    return ScreenSpec(1, Layout.FEED, width=200, height=200, elements=elements)


def test_spec_rejects_bad_placements():
    text = ElementSpec(ElementKind.TEXT, 10, 40, scale=2, text="HELLO")
    with pytest.raises(SpecError):
        _spec(text, ElementSpec(ElementKind.COLOR_PATCH, 20, 45, 30, 30)).check()
    with pytest.raises(SpecError):
        _spec(ElementSpec(ElementKind.COLOR_PATCH, 180, 40, 30, 30)).check()
    with pytest.raises(SpecError):
        _spec(ElementSpec(ElementKind.COLOR_PATCH, 10, 10, 30, 30)).check()
    with pytest.raises(SpecError):
        _spec(ElementSpec(ElementKind.IMAGE_BLOCK, 10, 40, 40, 20, text="LONG CAPTION", style="gradient")).check()


def test_element_spec_validation():
    assert ElementSpec(ElementKind.TEXT, 0, 0, text="hello").text == "HELLO"
    with pytest.raises(SpecError):
        ElementSpec(ElementKind.TEXT, 0, 0, text="naïve")
    with pytest.raises(SpecError):
        ElementSpec(ElementKind.TEXT, 0, 0, scale=1.5, text="HI")
    with pytest.raises(SpecError):
        ElementSpec(ElementKind.IMAGE_BLOCK, 0, 0, 10, 10, style="photo")
    with pytest.raises(ValueError):
        ScreenSpec(1, Layout.FEED, theme="solarized")


def test_scroll_sequence_shifts_content():
    spec = random_spec(71)
    frames = generate_scroll_sequence(spec, [40, -15])
    first, second, third = (f.rgba() for f in frames)
    assert np.array_equal(second[:-40], first[40:])
    assert np.array_equal(third[15:], second[:-15])
    assert [f.id for f in frames] == [0, 1, 2]
    assert [f.timestamp_us for f in frames] == [0, FRAME_INTERVAL_US, 2 * FRAME_INTERVAL_US]
    with pytest.raises(SpecError):
        generate_scroll_sequence(spec, [spec.height])


def test_scroll_sequence_reproducible_past_the_screen():
    spec = random_spec(72)
    a = generate_scroll_sequence(spec, [300, 300, -200])
    b = generate_scroll_sequence(spec, [300, 300, -200])
    assert a == b


def test_mosaic_red_stays_below_skin():
    colors = mosaic_colors(rng_for(3, 9), 50, 50)
    assert colors[..., 0].max() <= MOSAIC_MAX_RED


def test_png_round_trip(tmp_path):
    frame, _ = generate_screen(random_spec(41, Layout.VIDEO_STILL))
    path = save_png(frame, tmp_path / "shot.png")
    assert load_png(path) == frame


def test_shipped_manifest_loads():
    entries = load_manifest(MANIFEST)
    assert len(entries) == 13
    by_name = {e.name: e for e in entries}
    assert by_name["scroll_feed"].shifts == (40,) * 12
    assert by_name["plain_feed"].kinds == (ElementKind.TEXT, ElementKind.IMAGE_BLOCK)
    assert by_name["feed_twitter_browser"].spec.chrome == "browser"


def test_manifest_round_trip(tmp_path):
    entries = load_manifest(MANIFEST)[:3]
    assert load_manifest(write_manifest(entries, tmp_path / "m.csv")) == entries


def test_manifest_rejects_duplicate_names(tmp_path):
    path = tmp_path / "dup.csv"
    path.write_text("name,seed,layout\na,1,feed\na,2,feed\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_manifest(path)


def test_write_corpus_with_ground_truth(tmp_path):
    entry = next(e for e in load_manifest(MANIFEST) if e.name == "scroll_back_and_forth")
    paths = write_corpus([entry], tmp_path)
    assert len(paths) == 6
    frames = load_frames(tmp_path / entry.name)
    assert frames == generate_scroll_sequence(entry.spec, entry.shifts)
    _, truth = generate_screen(entry.spec)
    assert read_ground_truth(tmp_path / entry.name / GROUND_TRUTH_NAME) == truth


def test_load_frames_needs_pngs(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_frames(tmp_path / "missing")
    with pytest.raises(FileNotFoundError):
        load_frames(tmp_path)


def test_write_masks(tmp_path):
    written = write_masks(tmp_path, "linkedin")
    assert sorted(written) == ["demetrify/badge", "demetrify/metrics_bar", "occlude/stories_bar"]
    assert load_png(written["occlude/stories_bar"]).shape == (32, 122)
