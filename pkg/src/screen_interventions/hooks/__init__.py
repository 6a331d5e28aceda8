"""Detection hooks (text, mask, model) and the bindings the pipeline runs."""

from .binding import HookBinding, HookKind, HookOutcome, index_bindings
from .mask import Mask, find_masks, load_masks, run_mask_hook
from .model import (
    MODEL_REGISTRY,
    ColorRangeDetector,
    DetectorModel,
    register_model,
    resolve_model,
    run_model_hook,
)
from .text import TextBox, detect_text_regions, read_text, recognize_text, run_text_hook

__all__ = [
    "ColorRangeDetector",
    "DetectorModel",
    "HookBinding",
    "HookKind",
    "HookOutcome",
    "MODEL_REGISTRY",
    "Mask",
    "TextBox",
    "detect_text_regions",
    "find_masks",
    "index_bindings",
    "load_masks",
    "read_text",
    "recognize_text",
    "register_model",
    "resolve_model",
    "run_mask_hook",
    "run_model_hook",
    "run_text_hook",
]
