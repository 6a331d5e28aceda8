"""Vertical scroll displacement between two screen frames.

The previous frame is cut into full-width horizontal strips. Each strip is
searched for in the current frame within ``search_window`` rows of where it
was, using :func:`ncc_match` on a band of the current frame (so only vertical
displacement is considered). A strip votes when its best match is confident
and the matched segments also agree under the average hash; the frame pair
scrolled by the median vote.

Displacement is positive when content moved up the screen, i.e.
``cur[y] == prev[y + d]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import median_low
from typing import List, Optional, Tuple

import numpy as np

from ..core import DimensionError, Frame
from .gray import GrayImage, to_gray
from .hashing import average_hash, hamming
from .matching import ncc_match

MIN_VOTES = 3


@dataclass(frozen=True)
class ScrollConfig:
    strip_height: int = 32
    search_window: int = 120
    min_score: float = 0.85
    max_hamming: int = 10
    # Frames kept for comparison (the "last T timesteps"); 1 = consecutive only.
    history: int = 1

    def __post_init__(self) -> None:
        if self.strip_height < 1:
            raise ValueError(f"strip_height must be positive, got {self.strip_height}.")
        if self.search_window < 0:
            raise ValueError(f"search_window must be non-negative, got {self.search_window}.")
        if not 0.0 <= self.min_score <= 1.0:
            raise ValueError(f"min_score must lie in [0, 1], got {self.min_score}.")
        if not 0 <= self.max_hamming <= 64:
            raise ValueError(f"max_hamming must lie in [0, 64], got {self.max_hamming}.")
        if self.history < 1:
            raise ValueError(f"history must be at least 1, got {self.history}.")


def _best_offset(prev: GrayImage, cur: GrayImage, y0: int, sh: int, window: int) -> Tuple[int, float]:
    strip = prev.crop(0, y0, prev.width, sh)
    lo = max(0, y0 - window)
    hi = min(cur.height, y0 + sh + window)
    band = cur.crop(0, lo, cur.width, hi - lo)
    scores = ncc_match(band, strip)[:, 0]
    offsets = y0 - (lo + np.arange(scores.size))
    best = scores.max()
    # Among equally good placements the smallest movement wins.
    tied = offsets[scores == best]
    d = int(tied[np.argmin(np.abs(tied))])
    return d, float(best)


def strip_votes(prev: GrayImage, cur: GrayImage, cfg: ScrollConfig = ScrollConfig()) -> List[int]:
    """Per-strip displacements that pass both the score and the hash check."""
    if (prev.width, prev.height) != (cur.width, cur.height):
        raise DimensionError(
            f"Frame sizes differ: {prev.width}x{prev.height} vs {cur.width}x{cur.height}."
        )
    sh = cfg.strip_height
    votes: List[int] = []
    for y0 in range(0, prev.height - sh + 1, sh):
        d, score = _best_offset(prev, cur, y0, sh, cfg.search_window)
        if score < cfg.min_score:
            continue
        seg_prev = prev.crop(0, y0, prev.width, sh)
        seg_cur = cur.crop(0, y0 - d, cur.width, sh)
        if hamming(average_hash(seg_prev), average_hash(seg_cur)) > cfg.max_hamming:
            continue
        votes.append(d)
    return votes


def detect_scroll(
    prev: Frame,
    cur: Frame,
    strip_height: int = 32,
    search_window: int = 120,
    min_score: float = 0.85,
    max_hamming: int = 10,
) -> Optional[int]:
    """Signed vertical displacement from ``prev`` to ``cur``, or None.

    None means no scroll: fewer than three strips matched confidently, or
    the median displacement is zero.

    Raises:
        DimensionError: the frames differ in size.
    """
    if prev.shape != cur.shape:
        raise DimensionError(f"Frame sizes differ: {prev.shape} vs {cur.shape}.")
    cfg = ScrollConfig(strip_height, search_window, min_score, max_hamming)
    votes = strip_votes(to_gray(prev), to_gray(cur), cfg)
    if len(votes) < MIN_VOTES:
        return None
    d = int(median_low(votes))
    return d or None
