"""Media moderation: a model-hook intervention that hides detected imagery."""

from __future__ import annotations

from enum import Enum
from typing import Optional

from ..core import Frame
from ..hooks.binding import HookBinding, HookKind, HookOutcome
from ..hooks.model import DetectorModel, run_model_hook
from .actions import Action, box_action, inpaint_action


class MediaStyle(str, Enum):
    BOX = "box"
    PATCH = "patch"


def moderate_media(
    detector: DetectorModel,
    style: MediaStyle = MediaStyle.BOX,
    patch_action: Optional[Action] = None,
    name: str = "moderate_media",
) -> HookBinding:
    """BOX draws an opaque box over each detection; PATCH inpaints it.

    ``patch_action`` replaces majority inpainting for the PATCH style.
    """
    style = MediaStyle(style)
    act = box_action() if style is MediaStyle.BOX else (patch_action or inpaint_action())

    def evaluate(frame: Frame, _session: object) -> HookOutcome:
        return HookOutcome(tuple(run_model_hook(frame, detector, act)))

    return HookBinding(name, HookKind.MODEL, evaluate, params={"detector": detector.name, "style": style.value})
