"""Rendering actions shared by the interventions.

An action turns the items a hook flagged (detections or text boxes, anything
with a ``region``) into overlay ops.
"""

from __future__ import annotations

from typing import Any, Callable, List, Sequence

from ..core import BLACK, RGBA, ConfigError, Frame, OverlayOp
from ..imaging.inpaint import inpaint_fmm, inpaint_majority

Action = Callable[[Frame, Sequence[Any]], List[OverlayOp]]

INPAINT_METHODS = ("majority", "fmm")
ACTIONS = ("inpaint", "box", "label")
WARNING_TINT: RGBA = (255, 196, 0, 160)


def inpaint_action(method: str = "majority", radius: int = 5) -> Action:
    if method not in INPAINT_METHODS:
        raise ConfigError(f"Unknown inpaint method {method!r}; expected one of {INPAINT_METHODS}.")

    def act(frame: Frame, items: Sequence[Any]) -> List[OverlayOp]:
        if method == "fmm":
            return [inpaint_fmm(frame, it.region, radius=radius) for it in items]
        return [inpaint_majority(frame, it.region) for it in items]

    return act


def box_action(color: RGBA = BLACK) -> Action:
    def act(frame: Frame, items: Sequence[Any]) -> List[OverlayOp]:
        return [OverlayOp.fill_rect(it.region, color) for it in items]

    return act


def label_action(text: str = "WARNING", tint: RGBA = WARNING_TINT) -> Action:
    """Highlight each item with a translucent tint and a warning label."""

    def act(frame: Frame, items: Sequence[Any]) -> List[OverlayOp]:
        ops: List[OverlayOp] = []
        for it in items:
            ops.append(OverlayOp.fill_rect(it.region, tint))
            ops.append(OverlayOp.label(it.region, text))
        return ops

    return act


def make_action(name: str, inpaint: str = "majority", radius: int = 5, label: str = "WARNING") -> Action:
    """Action by its configuration name."""
    if name == "inpaint":
        return inpaint_action(inpaint, radius)
    if name == "box":
        return box_action()
    if name == "label":
        return label_action(label)
    raise ConfigError(f"Unknown action {name!r}; expected one of {ACTIONS}.")
