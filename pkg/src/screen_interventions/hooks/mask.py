"""Mask hook: find cropped interface elements on screen and act on them."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, List, Optional, Sequence

import numpy as np
from PIL import Image

from ..core import ConfigError, Detection, Frame, OverlayOp
from ..imaging.gray import GrayImage, luma, to_gray
from ..imaging.inpaint import inpaint_majority
from ..imaging.matching import MatchConfig, MatchMode, match_multiscale, non_max_suppression

logger = logging.getLogger(__name__)

MIN_MASK_SIDE = 4
MASK_SUFFIXES = (".png", ".bmp", ".tif", ".tiff", ".ppm", ".pgm")
# Detections covering at least this share of the frame count as full-screen.
FULLSCREEN_SHARE = 0.9

DetectionAction = Callable[[Frame, Sequence[Detection]], List[OverlayOp]]


@dataclass(frozen=True, eq=False)
class Mask:
    """A cropped screenshot of an interface element.

    ``pixels`` keeps the original RGBA crop; matching runs on ``template``,
    its gray rendition.
    """

    name: str
    template: GrayImage
    mode: MatchMode = MatchMode.COLOR
    pixels: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", MatchMode(self.mode))
        if self.template.width < MIN_MASK_SIDE or self.template.height < MIN_MASK_SIDE:
            raise ValueError(
                f"Mask {self.name!r} is {self.template.width}x{self.template.height}; "
                f"both sides must be at least {MIN_MASK_SIDE}."
            )

    @classmethod
    def from_rgba(cls, name: str, pixels: np.ndarray, mode: MatchMode = MatchMode.COLOR) -> "Mask":
        rgba = np.ascontiguousarray(pixels, dtype=np.uint8)
        return cls(name, GrayImage(luma(rgba[..., :3])), mode, rgba.copy())

    @classmethod
    def from_file(cls, path: Path, mode: MatchMode = MatchMode.COLOR) -> "Mask":
        with Image.open(path) as im:
            rgba = np.asarray(im.convert("RGBA"))
        return cls.from_rgba(Path(path).stem, rgba, mode)


def load_masks(masks_dir: Path, mode: MatchMode = MatchMode.COLOR) -> List[Mask]:
    """Every mask image in ``masks_dir``, in filename order.

    Raises:
        ConfigError: the directory is missing or holds no mask images.
    """
    masks_dir = Path(masks_dir)
    if not masks_dir.is_dir():
        raise ConfigError(f"Mask directory not found: {masks_dir}")
    files = sorted(p for p in masks_dir.iterdir() if p.suffix.lower() in MASK_SUFFIXES)
    if not files:
        raise ConfigError(f"No mask images in {masks_dir}")
    return [Mask.from_file(p, mode) for p in files]


def inpaint_detections(frame: Frame, detections: Sequence[Detection]) -> List[OverlayOp]:
    return [inpaint_majority(frame, d.region) for d in detections]


def find_masks(
    frame: Frame,
    masks: Sequence[Mask],
    cfg: MatchConfig = MatchConfig(),
    allow_fullscreen: bool = False,
) -> List[Detection]:
    """Detections of every mask, one NMS pass across masks and modes.

    Each mask is matched in its own mode; ``cfg.mode`` is ignored.
    """
    gray = to_gray(frame)
    found: List[Detection] = []
    for mode in MatchMode:
        group = [m for m in masks if m.mode is mode]
        if group:
            found.extend(
                match_multiscale(gray, [m.template for m in group], replace(cfg, mode=mode),
                                 labels=[m.name for m in group])
            )
    if not allow_fullscreen:
        limit = FULLSCREEN_SHARE * frame.width * frame.height
        found = [d for d in found if d.region.area < limit]
    found.sort(key=lambda d: -d.score)
    return non_max_suppression(found, cfg.nms_iou)


def run_mask_hook(
    frame: Frame,
    masks: Sequence[Mask],
    cfg: MatchConfig = MatchConfig(),
    action: Optional[DetectionAction] = None,
    allow_fullscreen: bool = False,
) -> List[OverlayOp]:
    """Apply ``action`` (majority inpainting by default) to every mask detection."""
    if not masks:
        raise ValueError("run_mask_hook needs at least one mask.")
    detections = find_masks(frame, masks, cfg, allow_fullscreen)
    logger.debug("Mask hook: %d detections on frame %d", len(detections), frame.id)
    if not detections:
        return []
    return list((action or inpaint_detections)(frame, detections))
