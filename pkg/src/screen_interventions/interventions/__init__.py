"""Reference interventions built from the hooks."""

from .actions import box_action, inpaint_action, label_action, make_action
from .elements import demetrify, occlude_elements
from .hate import Lexicon, hate_filter
from .media import MediaStyle, moderate_media
from .usage_lock import UsageLock, UsageLockState, usage_lock_update

__all__ = [
    "Lexicon",
    "MediaStyle",
    "UsageLock",
    "UsageLockState",
    "box_action",
    "demetrify",
    "hate_filter",
    "inpaint_action",
    "label_action",
    "make_action",
    "moderate_media",
    "occlude_elements",
    "usage_lock_update",
]
