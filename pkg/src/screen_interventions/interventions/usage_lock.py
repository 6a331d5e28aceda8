"""Usage locking: veil the screen progressively as scrolling accumulates.

Scroll displacement is accumulated in absolute pixels and quantised into
scroll events of ``event_px`` each, which makes the count independent of the
frame rate. The veil opacity ramps linearly from 0 at ``s0`` events to
``max_alpha`` at ``s1`` events. With a ``time_limit_s`` set, the veil jumps
to ``max_alpha`` once that much frame time has elapsed.

This is the one stateful intervention. It runs in the session owner,
sequentially, before the hooks of a frame are dispatched.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, replace
from typing import Deque, Optional, Tuple

from ..core import BLACK, DimensionError, Frame, OverlayOp
from ..imaging.scroll import ScrollConfig, detect_scroll

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class UsageLockState:
    s0: int = 10
    s1: int = 30
    max_alpha: float = 0.9
    # 0 means one frame height, fixed at the first update.
    event_px: int = 0
    time_limit_s: Optional[float] = None
    scroll_events: int = 0
    accumulated_px: int = 0
    elapsed_s: float = 0.0

    def __post_init__(self) -> None:
        if not 0 <= self.s0 < self.s1:
            raise ValueError(f"Need 0 <= s0 < s1, got s0={self.s0}, s1={self.s1}.")
        if not 0.0 <= self.max_alpha <= 1.0:
            raise ValueError(f"max_alpha must lie in [0, 1], got {self.max_alpha}.")
        if self.event_px < 0:
            raise ValueError(f"event_px must be non-negative, got {self.event_px}.")
        if self.time_limit_s is not None and self.time_limit_s <= 0:
            raise ValueError(f"time_limit_s must be positive, got {self.time_limit_s}.")

    @property
    def alpha(self) -> float:
        if self.time_limit_s is not None and self.elapsed_s >= self.time_limit_s:
            return self.max_alpha
        ramp = (self.scroll_events - self.s0) / float(self.s1 - self.s0)
        return min(1.0, max(0.0, ramp)) * self.max_alpha

    def veil(self) -> Optional[OverlayOp]:
        alpha = self.alpha
        return OverlayOp.veil(alpha, BLACK) if alpha > 0 else None


def _advance(state: UsageLockState, displacement: Optional[int], dt_us: int, height: int) -> UsageLockState:
    event_px = state.event_px or height
    accumulated = state.accumulated_px + abs(displacement or 0)
    return replace(
        state,
        event_px=event_px,
        accumulated_px=accumulated,
        scroll_events=max(state.scroll_events, accumulated // event_px),
        elapsed_s=state.elapsed_s + max(0, dt_us) / 1e6,
    )


def usage_lock_update(
    state: UsageLockState,
    prev: Frame,
    cur: Frame,
    scroll: ScrollConfig = ScrollConfig(),
) -> Tuple[UsageLockState, Optional[OverlayOp]]:
    """Fold the displacement between two consecutive frames into ``state``.

    Raises:
        DimensionError: the frames differ in size.
    """
    if prev.shape != cur.shape:
        raise DimensionError(f"Frame sizes differ: {prev.shape} vs {cur.shape}.")
    d = detect_scroll(prev, cur, scroll.strip_height, scroll.search_window, scroll.min_score, scroll.max_hamming)
    new = _advance(state, d, cur.timestamp_us - prev.timestamp_us, cur.height)
    return new, new.veil()


class UsageLock:
    """Session-owned usage lock comparing each frame with the last T frames.

    Frames are compared newest-first; the first displacement found is
    counted and the history restarts from the current frame, so no movement
    is counted twice. A frame of a new size (a rotation) restarts the history
    too; that one frame raises, later frames are counted again.
    """

    def __init__(self, state: UsageLockState = UsageLockState(), scroll: ScrollConfig = ScrollConfig()):
        self.state = state
        self.scroll = scroll
        self._history: Deque[Frame] = deque(maxlen=scroll.history)

    def step(self, frame: Frame) -> Optional[OverlayOp]:
        if not self._history:
            self._history.append(frame)
            self.state = _advance(self.state, None, 0, frame.height)
            return self.state.veil()

        newest = self._history[-1]
        if newest.shape != frame.shape:
            self._history.clear()
            self._history.append(frame)
            raise DimensionError(f"Frame sizes differ: {newest.shape} vs {frame.shape}.")
        displacement: Optional[int] = None
        for prev in reversed(self._history):
            displacement = detect_scroll(
                prev, frame, self.scroll.strip_height, self.scroll.search_window,
                self.scroll.min_score, self.scroll.max_hamming,
            )
            if displacement is not None:
                break
        before = self.state.scroll_events
        self.state = _advance(self.state, displacement, frame.timestamp_us - newest.timestamp_us, frame.height)
        if displacement is not None:
            self._history.clear()
            if self.state.scroll_events > before:
                logger.debug("Scroll events: %d (alpha %.3f)", self.state.scroll_events, self.state.alpha)
        self._history.append(frame)
        return self.state.veil()
