"""Element occlusion and demetrification: mask-hook interventions.

Both take a directory of cropped screenshots. Occlusion matches edge maps
(CONTOUR mode), so a stories bar cropped from one app still fires on another
app that draws the same circles in other colours. Demetrification matches
colour images of the metrics bar.
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path
from typing import Optional

from ..core import Frame
from ..hooks.binding import HookBinding, HookKind, HookOutcome
from ..hooks.mask import load_masks, run_mask_hook
from ..imaging.matching import MatchConfig, MatchMode
from .actions import Action, inpaint_action


def _mask_binding(
    name: str,
    masks_dir: Path,
    mode: MatchMode,
    cfg: MatchConfig,
    action: Optional[Action],
    allow_fullscreen: bool,
) -> HookBinding:
    masks = load_masks(masks_dir, mode)
    act = action or inpaint_action()
    cfg = replace(cfg, mode=mode)

    def evaluate(frame: Frame, _session: object) -> HookOutcome:
        return HookOutcome(tuple(run_mask_hook(frame, masks, cfg, act, allow_fullscreen)))

    return HookBinding(
        name,
        HookKind.MASK,
        evaluate,
        params={"masks": str(masks_dir), "mode": mode.value, "count": len(masks),
                "allow_fullscreen": allow_fullscreen},
    )


def occlude_elements(
    masks_dir: Path,
    cfg: MatchConfig = MatchConfig(),
    action: Optional[Action] = None,
    allow_fullscreen: bool = False,
    name: str = "occlude_elements",
) -> HookBinding:
    """Remove elements such as the stories bar, matched by shape.

    Raises:
        ConfigError: ``masks_dir`` holds no mask images.
    """
    return _mask_binding(name, masks_dir, MatchMode.CONTOUR, cfg, action, allow_fullscreen)


def demetrify(
    masks_dir: Path,
    cfg: MatchConfig = MatchConfig(),
    action: Optional[Action] = None,
    allow_fullscreen: bool = False,
    name: str = "demetrify",
) -> HookBinding:
    """Remove engagement metrics (like/share counters), matched by colour image.

    Raises:
        ConfigError: ``masks_dir`` holds no mask images.
    """
    return _mask_binding(name, masks_dir, MatchMode.COLOR, cfg, action, allow_fullscreen)
