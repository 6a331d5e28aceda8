"""Screen interventions: frames in, overlay plans out.

Detection hooks (text, mask, model) look at a screen frame and emit overlay
operations; interventions bind hooks to rendering actions; a session runs
them per frame and the overlay server streams the resulting plans back.
"""

from .core import (
    BoundsError,
    ConfigError,
    DegenerateInputError,
    Detection,
    DimensionError,
    Frame,
    OverlayOp,
    OverlayPlan,
    PixelFormat,
    Region,
    composite,
)
from .pipeline import Session, SessionState, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "BoundsError",
    "ConfigError",
    "DegenerateInputError",
    "Detection",
    "DimensionError",
    "Frame",
    "OverlayOp",
    "OverlayPlan",
    "PixelFormat",
    "Region",
    "Session",
    "SessionState",
    "composite",
    "run_pipeline",
]
