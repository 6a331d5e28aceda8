"""Text hook: find text lines on screen, read them, act on flagged ones.

Detection binarises at the Otsu threshold and keeps 8-connected components
shaped like glyphs from both polarities, so dark-on-light and light-on-dark
text are found alike. Components too large to be glyphs are re-binarised
with their own Otsu threshold (text printed inside an image block or a bar
sits in such a component). Glyphs that line up are merged into lines.

Recognition reads a line against the fixed 5x7 glyph atlas: the glyph scale
follows from the ink height, cells come from the vertical ink projection,
and each cell is scored against every atlas glyph of the same ink width by
normalised cross-correlation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from ..core import BLACK, Frame, OverlayOp, Region
from ..corpus.glyphs import ADVANCE, GLYPH_H, GLYPH_W, GLYPHS, ink_columns, scaled_glyph
from ..imaging.gray import GrayImage, otsu_threshold, to_gray

logger = logging.getLogger(__name__)

MIN_GLYPH_H = 2
MAX_GLYPH_H = 64
MAX_ASPECT = 4.0
LINE_OVERLAP = 0.6
MIN_GLYPH_SCORE = 0.9
# Components spanning less than this many gray levels are not split further.
MIN_CONTRAST = 32
MAX_SPLIT_DEPTH = 2
UNKNOWN = "?"

_EIGHT = np.ones((3, 3), dtype=bool)

Classifier = Callable[[str], float]
TextAction = Callable[[Frame, Sequence["TextBox"]], List[OverlayOp]]


@dataclass(frozen=True)
class TextBox:
    region: Region
    text: str
    confidence: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must lie in [0, 1], got {self.confidence}.")
        if self.confidence > 0 and not self.text:
            raise ValueError("A TextBox with positive confidence needs text.")


# ----------------------------
# Detection
# ----------------------------

def _is_glyph(h: int, w: int) -> bool:
    return MIN_GLYPH_H <= h <= MAX_GLYPH_H and w <= MAX_ASPECT * h


def _collect_glyphs(
    data: np.ndarray, within: np.ndarray, ox: int, oy: int, depth: int, out: List[Region]
) -> None:
    values = data[within]
    if values.size == 0 or int(values.max()) - int(values.min()) < MIN_CONTRAST:
        return
    t = otsu_threshold(values)
    for polarity in (data <= t, data > t):
        labels, _ = ndimage.label(polarity & within, structure=_EIGHT)
        for idx, sl in enumerate(ndimage.find_objects(labels), start=1):
            if sl is None:
                continue
            h = sl[0].stop - sl[0].start
            w = sl[1].stop - sl[1].start
            if _is_glyph(h, w):
                out.append(Region(ox + sl[1].start, oy + sl[0].start, w, h))
            elif depth < MAX_SPLIT_DEPTH and h >= MIN_GLYPH_H:
                _collect_glyphs(
                    data[sl], labels[sl] == idx, ox + sl[1].start, oy + sl[0].start, depth + 1, out
                )


def _max_gap(height: int) -> int:
    # One glyph height plus the side bearings of narrow glyphs around a space.
    return height + 2 * max(1, int(round(height / GLYPH_H)))


def _merge_lines(glyphs: Sequence[Region]) -> List[Region]:
    lines: List[Tuple[Region, int]] = []  # (bounding box, tallest glyph)
    for g in sorted(glyphs, key=lambda r: (r.x, r.y)):
        for i, (box, tallest) in enumerate(lines):
            overlap = min(g.bottom, box.bottom) - max(g.y, box.y)
            if overlap < LINE_OVERLAP * min(g.h, box.h):
                continue
            if g.x - box.right > _max_gap(tallest):
                continue
            lines[i] = (box.union(g), max(tallest, g.h))
            break
        else:
            lines.append((g, g.h))

    # Counter-polarity components inside glyphs (letter holes) form lines of
    # their own; keep only lines not contained in another.
    kept: List[Region] = []
    for box in sorted((b for b, _ in lines), key=lambda r: (-r.area, r.y, r.x)):
        if not any(k.contains(box) for k in kept):
            kept.append(box)
    return sorted(kept, key=lambda r: (r.y, r.x))


def detect_text_regions(gray: GrayImage) -> List[Region]:
    """Text line regions, top-to-bottom then left-to-right."""
    glyphs: List[Region] = []
    within = np.ones(gray.data.shape, dtype=bool)
    _collect_glyphs(gray.data, within, 0, 0, 0, glyphs)
    return _merge_lines(glyphs)


# ----------------------------
# Recognition
# ----------------------------

def _ink_mask(gray: GrayImage, line: Region) -> np.ndarray:
    crop = gray.data[line.slices()].astype(np.int64)
    t = otsu_threshold(crop)
    # Background polarity from the one-pixel ring around the line.
    y0, y1 = max(0, line.y - 1), min(gray.height, line.bottom + 1)
    x0, x1 = max(0, line.x - 1), min(gray.width, line.right + 1)
    ring = np.ones((y1 - y0, x1 - x0), dtype=bool)
    ring[line.y - y0 : line.y - y0 + line.h, line.x - x0 : line.x - x0 + line.w] = False
    around = gray.data[y0:y1, x0:x1][ring].astype(np.int64)
    if around.size == 0:
        around = np.concatenate([crop[0], crop[-1], crop[:, 0], crop[:, -1]])
    bright_background = np.count_nonzero(around > t) * 2 >= around.size
    return crop <= t if bright_background else crop > t


def _glyph_score(cell: np.ndarray, glyph: np.ndarray) -> float:
    a = cell.astype(np.float64) - cell.mean()
    b = glyph.astype(np.float64) - glyph.mean()
    den = np.sqrt((a * a).sum() * (b * b).sum())
    if den == 0:
        return 1.0 if np.array_equal(cell, glyph) else 0.0
    return float((np.clip((a * b).sum() / den, -1.0, 1.0) + 1.0) / 2.0)


def _column_runs(cols: np.ndarray) -> List[Tuple[int, int]]:
    runs: List[Tuple[int, int]] = []
    idx = np.flatnonzero(cols)
    if idx.size == 0:
        return runs
    start = prev = int(idx[0])
    for c in idx[1:]:
        c = int(c)
        if c != prev + 1:
            runs.append((start, prev))
            start = c
        prev = c
    runs.append((start, prev))
    return runs


def _cell(ink: np.ndarray, top: int, x: int, scale: int) -> np.ndarray:
    h, w = GLYPH_H * scale, GLYPH_W * scale
    out = np.zeros((h, w), dtype=bool)
    src = ink[top : top + h, max(0, x) : x + w]
    dx = max(0, -x)
    out[: src.shape[0], dx : dx + src.shape[1]] = src
    return out


def recognize_text(gray: GrayImage, line: Region) -> TextBox:
    """Read one line region against the glyph atlas.

    Cells that match no glyph with a score of at least 0.9 read as '?' and
    count 0 towards the confidence, which is the mean per-glyph score.
    """
    if not line.fits(gray.width, gray.height):
        raise ValueError(f"Line {line} exceeds image {gray.width}x{gray.height}.")
    ink = _ink_mask(gray, line)
    rows = np.flatnonzero(ink.any(axis=1))
    if rows.size == 0:
        return TextBox(line, "", 0.0)
    top = int(rows[0])
    scale = max(1, int(round((int(rows[-1]) - top + 1) / GLYPH_H)))

    chars: List[str] = []
    scores: List[float] = []
    last_x: Optional[int] = None
    for c0, c1 in _column_runs(ink.any(axis=0)):
        width = c1 - c0 + 1
        best_ch, best_score, best_x = UNKNOWN, 0.0, c0
        for ch in GLYPHS:
            cols = ink_columns(ch)
            if cols is None or (cols[1] - cols[0] + 1) * scale != width:
                continue
            x = c0 - cols[0] * scale
            score = _glyph_score(_cell(ink, top, x, scale), scaled_glyph(ch, scale))
            if score > best_score:
                best_ch, best_score, best_x = ch, score, x
        if best_score < MIN_GLYPH_SCORE:
            best_ch, best_score = UNKNOWN, 0.0
        if last_x is not None:
            spaces = int(round((best_x - last_x) / (ADVANCE * scale))) - 1
            chars.append(" " * max(0, spaces))
        chars.append(best_ch)
        scores.append(best_score)
        last_x = best_x

    text = "".join(chars)
    confidence = float(np.mean(scores)) if scores else 0.0
    if not text:
        confidence = 0.0
    return TextBox(line, text, confidence)


def read_text(frame: Frame) -> List[TextBox]:
    """Detect and recognise every text line of a frame."""
    gray = to_gray(frame)
    return [recognize_text(gray, line) for line in detect_text_regions(gray)]


# ----------------------------
# Hook
# ----------------------------

def blackout_boxes(frame: Frame, boxes: Sequence[TextBox]) -> List[OverlayOp]:
    """Opaque black box over each flagged line."""
    return [OverlayOp.fill_rect(box.region, BLACK) for box in boxes]


def flag_text(boxes: Sequence[TextBox], classifier: Classifier, threshold: float) -> List[TextBox]:
    return [box for box in boxes if classifier(box.text) >= threshold]


def run_text_hook(
    frame: Frame,
    classifier: Classifier,
    threshold: float,
    action: Optional[TextAction] = None,
    boxes: Optional[Sequence[TextBox]] = None,
) -> List[OverlayOp]:
    """Ops for every line whose classifier score reaches ``threshold``.

    ``boxes`` lets a caller that already read the frame skip recognition.
    """
    if boxes is None:
        boxes = read_text(frame)
    flagged = flag_text(boxes, classifier, threshold)
    logger.debug("Text hook: %d lines, %d flagged on frame %d", len(boxes), len(flagged), frame.id)
    if not flagged:
        return []
    return list((action or blackout_boxes)(frame, flagged))
