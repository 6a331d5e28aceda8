from __future__ import annotations

from dataclasses import replace

import pytest

from screen_interventions.core import OpKind, OverlayOp, OverlayPlan, Region
from screen_interventions.corpus.generate import Layout, generate_scroll_sequence, random_spec
from screen_interventions.hooks import HookBinding, HookKind, resolve_model
from screen_interventions.hooks.binding import HookOutcome, index_bindings
from screen_interventions.interventions import (
    Lexicon,
    UsageLock,
    UsageLockState,
    demetrify,
    hate_filter,
    moderate_media,
    occlude_elements,
)
from screen_interventions.pipeline import Session, SessionState, evaluate_bindings, run_pipeline

from .conftest import solid


def _boxes(name: str, *regions: Region, z: int = 0) -> HookBinding:
    def evaluate(frame, _state):
        return HookOutcome(tuple(OverlayOp.fill_rect(r, z=z) for r in regions))

    return HookBinding(name, HookKind.MODEL, evaluate)


def _failing(name: str) -> HookBinding:
    def evaluate(frame, _state):
        raise RuntimeError("model crashed")

    return HookBinding(name, HookKind.MODEL, evaluate)


def test_no_bindings_give_an_empty_plan():
    frame = solid(16, 16, frame_id=3)
    plan, record = run_pipeline(frame, [])
    assert plan == OverlayPlan(3)
    assert record.frame_id == 3 and record.per_hook_us == {} and record.errors == {}


def test_equal_z_ties_follow_registration_order():
    frame = solid(16, 16)
    a = _boxes("a", Region(0, 0, 2, 2), Region(4, 0, 2, 2))
    b = _boxes("b", Region(8, 8, 2, 2))
    top = _boxes("top", Region(1, 1, 1, 1), z=5)

    plan, _ = run_pipeline(frame, index_bindings([top, a, b]))
    assert [op.region for op in plan.ops] == [
        Region(0, 0, 2, 2), Region(4, 0, 2, 2), Region(8, 8, 2, 2), Region(1, 1, 1, 1)
    ]
    flipped, _ = run_pipeline(frame, index_bindings([b, a, top]))
    assert [op.region for op in flipped.ops][:3] == [Region(8, 8, 2, 2), Region(0, 0, 2, 2), Region(4, 0, 2, 2)]


def test_failing_hook_is_skipped_and_recorded():
    frame = solid(16, 16)
    outside = _boxes("outside", Region(10, 10, 8, 8))
    bindings = index_bindings(
        [_boxes("a", Region(0, 0, 2, 2)), _failing("boom"), outside, _boxes("b", Region(4, 4, 2, 2))]
    )
    plan, record = run_pipeline(frame, bindings)
    assert [op.region for op in plan.ops] == [Region(0, 0, 2, 2), Region(4, 4, 2, 2)]
    assert record.errors["boom"] == "RuntimeError: model crashed"
    assert record.errors["outside"].startswith("BoundsError")
    assert set(record.per_hook_us) == {"a", "boom", "outside", "b"}


def test_disabled_binding_is_as_if_absent():
    frame = solid(16, 16)
    a, b, c = _boxes("a", Region(0, 0, 2, 2)), _boxes("b", Region(2, 2, 2, 2)), _boxes("c", Region(4, 4, 2, 2))
    with_disabled, record = run_pipeline(frame, index_bindings([a, replace(b, enabled=False), c]))
    without, _ = run_pipeline(frame, index_bindings([a, c]))
    assert with_disabled == without
    assert "b" not in record.per_hook_us


def test_duplicate_registration_index_rejected():
    frame = solid(8, 8)
    with pytest.raises(ValueError):
        evaluate_bindings(frame, [_boxes("a"), _boxes("b")], SessionState())


def test_binding_names_must_be_unique():
    with pytest.raises(ValueError, match="repeated: a"):
        index_bindings([_boxes("a"), _boxes("b"), _boxes("a")])
    with pytest.raises(ValueError):
        Session([_boxes("usage_lock")])


def test_session_rejects_frame_ids_that_do_not_increase():
    session = Session([_boxes("a", Region(0, 0, 2, 2))])
    session.process(solid(8, 8, frame_id=4))
    for stale in (4, 2):
        with pytest.raises(ValueError, match="strictly increase"):
            session.process(solid(8, 8, frame_id=stale))
    plan, _ = session.process(solid(8, 8, frame_id=5))
    assert plan.frame_id == 5 and session.state.frames_processed == 2


def _five(masks_root, lexicon_file):
    bindings = [
        occlude_elements(masks_root / "occlude"),
        demetrify(masks_root / "demetrify"),
        hate_filter(Lexicon.from_file(lexicon_file), 0.5),
        moderate_media(resolve_model("skin")),
    ]
    return bindings, lambda: UsageLock(UsageLockState(s0=0, s1=4, event_px=40))


def _screens(seed: int, layout: Layout = Layout.FEED):
    return generate_scroll_sequence(random_spec(seed, layout, width=240, height=320), [40, 40])


def test_thread_pool_gives_the_sequential_plan(masks_root, lexicon_file):
    bindings = index_bindings(_five(masks_root, lexicon_file)[0])
    for seed, layout in ((3, Layout.MIXED), (4, Layout.STORIES)):
        frame = _screens(seed, layout)[0]
        sequential, _ = run_pipeline(frame, bindings)
        pooled, _ = run_pipeline(frame, bindings, workers=4)
        assert pooled == sequential


def test_five_interventions_are_the_union_of_each_alone(masks_root, lexicon_file):
    bindings, lock = _five(masks_root, lexicon_file)
    together = Session(bindings, lock())
    alone = [Session([b]) for b in bindings] + [Session([], lock())]
    for frame in _screens(101):
        plan, record = together.process(frame)
        ops = [op for s in alone for op in s.process(frame)[0].ops]
        assert plan == OverlayPlan.from_ops(frame.id, ops)
        assert record.errors == {}
    assert plan.ops[-1].kind is OpKind.VEIL
