from __future__ import annotations

import numpy as np
import pytest

from screen_interventions.core import BLACK, ConfigError, Frame, OpKind, Region, composite, OverlayPlan
from screen_interventions.corpus.elements import SKIN, ElementKind, badge, element_mask, get_theme
from screen_interventions.corpus.generate import ElementSpec, Layout, ScreenSpec, generate_screen
from screen_interventions.hooks import (
    MODEL_REGISTRY,
    ColorRangeDetector,
    DetectorModel,
    HookBinding,
    HookKind,
    Mask,
    find_masks,
    index_bindings,
    load_masks,
    register_model,
    resolve_model,
    run_mask_hook,
    run_model_hook,
)
from screen_interventions.imaging.gray import resize_rgba
from screen_interventions.imaging.matching import MatchMode

from .conftest import solid


def _screen(*elements: ElementSpec, theme: str = "twitter"):
    spec = ScreenSpec(5, Layout.MIXED, width=240, height=200, elements=elements, theme=theme)
    return generate_screen(spec)


@pytest.mark.parametrize("theme", ["twitter", "linkedin", "dark"])
def test_contour_mask_finds_stories_bar_in_any_theme(theme):
    frame, truth = _screen(ElementSpec(ElementKind.STORIES_BAR, 20, 60, scale=1.1), theme=theme)
    mask = Mask.from_rgba("stories_bar", element_mask(ElementKind.STORIES_BAR), MatchMode.CONTOUR)
    found = find_masks(frame, [mask])
    assert found[0].region == truth.of_kind(ElementKind.STORIES_BAR)[0].rect
    assert found[0].scale == 1.1
    assert found[0].score >= 0.9
    assert found[0].label == "stories_bar"


@pytest.mark.parametrize("theme", ["twitter", "linkedin", "dark"])
@pytest.mark.parametrize("scale", [1.0, 1.05, 1.25, 1.37])
def test_contour_mask_tolerates_scales_between_ladder_rungs(theme, scale):
    frame, truth = _screen(ElementSpec(ElementKind.STORIES_BAR, 20, 60, scale=scale), theme=theme)
    mask = Mask.from_rgba("stories_bar", element_mask(ElementKind.STORIES_BAR), MatchMode.CONTOUR)
    found = find_masks(frame, [mask])
    assert len(found) == 1
    assert found[0].region.iou(truth.of_kind(ElementKind.STORIES_BAR)[0].rect) >= 0.85
    assert found[0].scale == pytest.approx(scale, rel=0.03)


def test_color_mask_finds_badge_and_inpaints_it():
    frame, truth = _screen(ElementSpec(ElementKind.BADGE, 100, 80, scale=1.4641))
    rect = truth.of_kind(ElementKind.BADGE)[0].rect
    mask = Mask.from_rgba("badge", element_mask(ElementKind.BADGE))
    ops = run_mask_hook(frame, [mask])
    assert len(ops) == 1
    assert ops[0].kind is OpKind.PATCH and ops[0].region == rect
    out = composite(frame, OverlayPlan.from_ops(frame.id, ops)).rgba()
    assert (out[rect.slices()][..., :3] == 255).all()


def test_mask_hook_on_empty_screen_is_silent():
    frame, _ = _screen()
    mask = Mask.from_rgba("badge", element_mask(ElementKind.BADGE))
    assert run_mask_hook(frame, [mask]) == []
    with pytest.raises(ValueError):
        run_mask_hook(frame, [])


def test_fullscreen_detections_need_opt_in():
    px = resize_rgba(badge(get_theme("twitter")), 1.1)
    frame = Frame.from_array(px)
    mask = Mask.from_rgba("badge", element_mask(ElementKind.BADGE))
    limit = 0.9 * frame.width * frame.height
    assert all(d.region.area < limit for d in find_masks(frame, [mask]))
    allowed = find_masks(frame, [mask], allow_fullscreen=True)
    assert allowed[0].region == Region(0, 0, frame.width, frame.height)


def test_load_masks_errors(tmp_path, masks_root):
    with pytest.raises(ConfigError):
        load_masks(tmp_path / "missing")
    (tmp_path / "empty").mkdir()
    with pytest.raises(ConfigError):
        load_masks(tmp_path / "empty")
    masks = load_masks(masks_root / "demetrify", MatchMode.COLOR)
    assert [m.name for m in masks] == ["badge", "metrics_bar"]
    assert masks[0].pixels.shape == (20, 20, 4)


def test_mask_rejects_tiny_crop():
    with pytest.raises(ValueError):
        Mask.from_rgba("dot", np.zeros((3, 8, 4), dtype=np.uint8))


def test_color_range_detector_boxes_blobs():
    px = solid(100, 80).rgba().copy()
    px[10:40, 20:60, :3] = SKIN
    px[70:72, 90:92, :3] = SKIN
    frame = Frame.from_array(px)
    detector = resolve_model("skin")
    assert isinstance(detector, DetectorModel)
    found = detector.infer(frame)
    assert [d.region for d in found] == [Region(20, 10, 40, 30)]
    ops = run_model_hook(frame, detector)
    assert len(ops) == 1 and ops[0].kind is OpKind.FILL_RECT and ops[0].color == BLACK


def test_model_hook_without_detections():
    assert run_model_hook(solid(20, 20), ColorRangeDetector("red", (200, 0, 0), (255, 40, 40))) == []


def test_resolve_model_arguments():
    det = resolve_model("color_range:0,0,0-10,10,10")
    assert det.lo == (0, 0, 0) and det.hi == (10, 10, 10)
    for bad in ("nope", "color_range", "color_range:1,2-3,4,5", "color_range:9,9,9-1,1,1"):
        with pytest.raises(ConfigError):
            resolve_model(bad)


def test_registered_model_resolves(monkeypatch):
    monkeypatch.setitem(MODEL_REGISTRY, "white", lambda _arg: ColorRangeDetector("white", (250,) * 3, (255,) * 3))
    assert resolve_model("white").infer(solid(8, 8))[0].region == Region(0, 0, 8, 8)
    with pytest.raises(ValueError):
        register_model("a:b", lambda _arg: resolve_model("skin"))


def test_index_bindings_numbers_in_order():
    noop = lambda frame, state: None  # noqa: E731
    bindings = index_bindings([HookBinding("a", HookKind.TEXT, noop), HookBinding("b", "mask", noop)])
    assert [b.registration_index for b in bindings] == [0, 1]
    assert bindings[1].kind is HookKind.MASK
    with pytest.raises(ValueError):
        HookBinding("", HookKind.MODEL, noop)
