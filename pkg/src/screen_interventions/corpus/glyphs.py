"""Fixed 5x7 bitmap font.

The same atlas renders corpus text, overlay labels and is the reference set
the text hook recognises against, so OCR round-trips are exact. Letters and
digits ink both the top and the bottom row; every glyph's ink columns are
contiguous, which lets the recogniser split lines on empty columns.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Dict, Tuple

import numpy as np

GLYPH_W = 5
GLYPH_H = 7
# Blank column between glyph cells, in glyph pixels.
GLYPH_GAP = 1
ADVANCE = GLYPH_W + GLYPH_GAP

_RAW: Dict[str, Tuple[str, ...]] = {
    "A": (".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"),
    "B": ("####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."),
    "C": (".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."),
    "D": ("####.", "#...#", "#...#", "#...#", "#...#", "#...#", "####."),
    "E": ("#####", "#....", "#....", "####.", "#....", "#....", "#####"),
    "F": ("#####", "#....", "#....", "####.", "#....", "#....", "#...."),
    "G": (".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".###."),
    "H": ("#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"),
    "I": (".###.", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."),
    "J": ("..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."),
    "K": ("#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"),
    "L": ("#....", "#....", "#....", "#....", "#....", "#....", "#####"),
    "M": ("#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"),
    "N": ("#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#", "#...#"),
    "O": (".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."),
    "P": ("####.", "#...#", "#...#", "####.", "#....", "#....", "#...."),
    "Q": (".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#"),
    "R": ("####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"),
    "S": (".####", "#....", "#....", ".###.", "....#", "....#", "####."),
    "T": ("#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."),
    "U": ("#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."),
    "V": ("#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."),
    "W": ("#...#", "#...#", "#...#", "#.#.#", "#.#.#", "#.#.#", ".#.#."),
    "X": ("#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#"),
    "Y": ("#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#.."),
    "Z": ("#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"),
    "0": (".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."),
    "1": ("..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."),
    "2": (".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"),
    "3": ("#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###."),
    "4": ("...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."),
    "5": ("#####", "#....", "####.", "....#", "....#", "#...#", ".###."),
    "6": ("..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."),
    "7": ("#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."),
    "8": (".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."),
    "9": (".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."),
    " ": (".....", ".....", ".....", ".....", ".....", ".....", "....."),
    ".": (".....", ".....", ".....", ".....", ".....", ".##..", ".##.."),
    ",": (".....", ".....", ".....", ".....", ".##..", "..#..", ".#..."),
    "!": ("..#..", "..#..", "..#..", "..#..", "..#..", ".....", "..#.."),
    "?": (".###.", "#...#", "....#", "...#.", "..#..", ".....", "..#.."),
    ":": (".....", ".##..", ".##..", ".....", ".##..", ".##..", "....."),
    "'": ("..#..", "..#..", ".#...", ".....", ".....", ".....", "....."),
    "-": (".....", ".....", ".....", ".###.", ".....", ".....", "....."),
    "+": (".....", "..#..", "..#..", "#####", "..#..", "..#..", "....."),
    "/": ("....#", "....#", "...#.", "..#..", ".#...", "#....", "#...."),
    "#": (".#.#.", ".#.#.", "#####", ".#.#.", "#####", ".#.#.", ".#.#."),
    "%": ("##..#", "##..#", "...#.", "..#..", ".#...", "#..##", "#..##"),
    "(": ("...#.", "..#..", ".#...", ".#...", ".#...", "..#..", "...#."),
    ")": (".#...", "..#..", "...#.", "...#.", "...#.", "..#..", ".#..."),
}

CHARSET = "".join(_RAW)


def _to_bitmap(rows: Tuple[str, ...]) -> np.ndarray:
    bm = np.array([[ch == "#" for ch in row] for row in rows], dtype=bool)
    bm.setflags(write=False)
    return bm


GLYPHS: Dict[str, np.ndarray] = {ch: _to_bitmap(rows) for ch, rows in _RAW.items()}


def glyph_bitmap(ch: str) -> np.ndarray:
    """Return the 7x5 boolean bitmap for ``ch``."""
    try:
        return GLYPHS[ch]
    except KeyError:
        raise ValueError(f"Character {ch!r} is not in the glyph atlas.") from None


def ink_columns(ch: str) -> Tuple[int, int] | None:
    """First and last inked column of a glyph, or None for blank glyphs."""
    cols = np.flatnonzero(glyph_bitmap(ch).any(axis=0))
    if cols.size == 0:
        return None
    return int(cols[0]), int(cols[-1])


@lru_cache(maxsize=512)
def scaled_glyph(ch: str, scale: int) -> np.ndarray:
    """Glyph bitmap blown up by an integer factor (pixel replication)."""
    bm = np.kron(glyph_bitmap(ch), np.ones((scale, scale), dtype=bool))
    bm.setflags(write=False)
    return bm


def text_size(text: str, scale: int = 1) -> Tuple[int, int]:
    """Pixel (width, height) of ``text`` rendered at ``scale``."""
    if not text:
        return 0, GLYPH_H * scale
    return (ADVANCE * len(text) - GLYPH_GAP) * scale, GLYPH_H * scale


def render_text(text: str, scale: int = 1) -> np.ndarray:
    """Rasterise ``text`` into a boolean ink mask of shape ``(7*scale, width)``."""
    if scale < 1:
        raise ValueError("scale must be a positive integer")
    width, height = text_size(text, scale)
    out = np.zeros((height, width), dtype=bool)
    for i, ch in enumerate(text):
        x = i * ADVANCE * scale
        out[:, x : x + GLYPH_W * scale] = scaled_glyph(ch, scale)
    return out


def normalise_label(text: str) -> str:
    """Upper-case ``text`` and replace anything outside the atlas with '?'."""
    return "".join(ch if ch in GLYPHS else "?" for ch in text.upper())
