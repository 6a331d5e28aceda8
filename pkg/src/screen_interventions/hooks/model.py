"""Model hook: run any detector over the frame and act on its detections.

Detectors are looked up by name in :data:`MODEL_REGISTRY`. Two kinds are
built in:

* ``skin``: a colour-range stand-in for a nudity detector.
* ``color_range:R,G,B-R,G,B``: any inclusive RGB box.

External detectors (a real OCR engine, a learned classifier) plug in with
:func:`register_model`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Protocol, Sequence, Tuple, runtime_checkable

import numpy as np
from scipy import ndimage

from ..core import BLACK, ConfigError, Detection, Frame, OverlayOp, Region

logger = logging.getLogger(__name__)

RGB = Tuple[int, int, int]
DetectionAction = Callable[[Frame, Sequence[Detection]], List[OverlayOp]]

_EIGHT = np.ones((3, 3), dtype=bool)


@runtime_checkable
class DetectorModel(Protocol):
    """Anything with a ``name`` and a deterministic ``infer``."""

    name: str

    def infer(self, frame: Frame) -> List[Detection]:
        ...


@dataclass(frozen=True)
class ColorRangeDetector:
    """Boxes every 8-connected blob of pixels whose RGB lies in ``[lo, hi]``."""

    name: str
    lo: RGB
    hi: RGB
    min_area: int = 16

    def __post_init__(self) -> None:
        if len(self.lo) != 3 or len(self.hi) != 3:
            raise ValueError("Colour bounds need three channels.")
        if any(a > b for a, b in zip(self.lo, self.hi)):
            raise ValueError(f"Lower bound {self.lo} exceeds upper bound {self.hi}.")

    def infer(self, frame: Frame) -> List[Detection]:
        rgb = frame.rgba()[..., :3]
        hit = np.all((rgb >= np.array(self.lo)) & (rgb <= np.array(self.hi)), axis=-1)
        labels, _ = ndimage.label(hit, structure=_EIGHT)
        out: List[Detection] = []
        for sl in ndimage.find_objects(labels):
            if sl is None:
                continue
            region = Region(sl[1].start, sl[0].start, sl[1].stop - sl[1].start, sl[0].stop - sl[0].start)
            if region.area >= self.min_area:
                out.append(Detection(region, 1.0, label=self.name))
        return out


SKIN_LO: RGB = (200, 150, 120)
SKIN_HI: RGB = (245, 195, 165)

ModelFactory = Callable[[Optional[str]], DetectorModel]


def _parse_rgb(text: str) -> RGB:
    parts = [int(p) for p in text.split(",")]
    if len(parts) != 3 or any(not 0 <= p <= 255 for p in parts):
        raise ValueError(f"Bad RGB triple {text!r}.")
    return parts[0], parts[1], parts[2]


def _color_range(arg: Optional[str]) -> DetectorModel:
    if not arg or "-" not in arg:
        raise ConfigError("color_range needs bounds, e.g. color_range:200,150,120-245,195,165")
    lo, hi = arg.split("-", 1)
    return ColorRangeDetector(f"color_range:{arg}", _parse_rgb(lo), _parse_rgb(hi))


MODEL_REGISTRY: Dict[str, ModelFactory] = {
    "skin": lambda _arg: ColorRangeDetector("skin", SKIN_LO, SKIN_HI),
    "color_range": _color_range,
}


def register_model(name: str, factory: ModelFactory) -> None:
    if ":" in name:
        raise ValueError(f"Model names may not contain ':', got {name!r}.")
    MODEL_REGISTRY[name] = factory


def resolve_model(spec: str) -> DetectorModel:
    """Instantiate ``name`` or ``name:argument`` from the registry.

    Raises:
        ConfigError: unknown name or bad argument.
    """
    name, _, arg = spec.partition(":")
    factory = MODEL_REGISTRY.get(name)
    if factory is None:
        raise ConfigError(f"Unknown detector {name!r}; known: {', '.join(sorted(MODEL_REGISTRY))}")
    try:
        return factory(arg or None)
    except ValueError as exc:
        raise ConfigError(f"Detector {spec!r}: {exc}") from exc


def box_detections(frame: Frame, detections: Sequence[Detection]) -> List[OverlayOp]:
    return [OverlayOp.fill_rect(d.region, BLACK) for d in detections]


def run_model_hook(
    frame: Frame,
    model: DetectorModel,
    action: Optional[DetectionAction] = None,
) -> List[OverlayOp]:
    """Apply ``action`` (opaque boxes by default) to ``model.infer(frame)``.

    Model failures propagate; the pipeline isolates them per hook.
    """
    detections = model.infer(frame)
    logger.debug("Model %s: %d detections on frame %d", model.name, len(detections), frame.id)
    if not detections:
        return []
    return list((action or box_detections)(frame, detections))
