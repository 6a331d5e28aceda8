"""Flat UI building blocks for synthetic screens.

Every element is rendered at a base size and planted with the same
nearest-neighbour resize the mask hook uses, so a base render works as a
mask for planted copies at any scale the matcher reaches.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Sequence, Tuple

import numpy as np

from ..core import RGBA
from .glyphs import render_text

RGB = Tuple[int, int, int]

STORIES_W, STORIES_H = 122, 32
STORY_CENTERS_X = (16, 46, 76, 106)
STORY_CENTER_Y = 16
RING_INNER, RING_OUTER = 9, 12
AVATAR_RADIUS = 7

METRICS_W, METRICS_H = 132, 16
METRIC_GROUPS_X = (2, 46, 90)
ICON_SIDE = 12
MASK_COUNTS = ("12", "4", "87")

BADGE_SIDE = 20
BADGE_RED: RGB = (224, 36, 36)
BADGE_WHITE: RGB = (255, 255, 255)
BADGE_DIGIT = "3"

# Inside the skin detector's colour range.
SKIN: RGB = (224, 172, 140)
CAPTION_INK: RGB = (0, 0, 0)
GRADIENT_LO, GRADIENT_HI = 180, 235
MOSAIC_CELL = 8
# Mosaic red stays below the skin range.
MOSAIC_MAX_RED = 190

URL_BAR: RGB = (241, 243, 244)
URL_INK: RGB = (95, 99, 104)
URL_TEXT = "SOCIAL.EXAMPLE"


class ElementKind(str, Enum):
    STORIES_BAR = "stories_bar"
    METRICS_BAR = "metrics_bar"
    TEXT = "text"
    IMAGE_BLOCK = "image_block"
    COLOR_PATCH = "color_patch"
    BADGE = "badge"


@dataclass(frozen=True)
class Theme:
    name: str
    background: RGB
    text: RGB
    status_bar: RGB
    bar_background: RGB
    ring: RGB
    metric_icon: RGB
    metric_digits: RGB


THEMES: Dict[str, Theme] = {
    "twitter": Theme(
        "twitter",
        background=(255, 255, 255),
        text=(15, 20, 25),
        status_bar=(29, 161, 242),
        bar_background=(15, 20, 25),
        ring=(120, 200, 255),
        metric_icon=(83, 100, 113),
        metric_digits=(225, 229, 233),
    ),
    "linkedin": Theme(
        "linkedin",
        background=(243, 242, 239),
        text=(0, 0, 0),
        status_bar=(10, 102, 194),
        bar_background=(56, 52, 48),
        ring=(255, 200, 80),
        metric_icon=(102, 102, 102),
        metric_digits=(215, 214, 211),
    ),
    "dark": Theme(
        "dark",
        background=(21, 32, 43),
        text=(231, 233, 234),
        status_bar=(32, 45, 58),
        bar_background=(0, 0, 0),
        ring=(200, 120, 255),
        metric_icon=(139, 152, 165),
        metric_digits=(45, 58, 71),
    ),
}

# Height of the top chrome per style: an app status bar or a mobile browser URL bar.
CHROME_HEIGHT: Dict[str, int] = {"app": 24, "browser": 32}


def get_theme(name: str) -> Theme:
    try:
        return THEMES[name]
    except KeyError:
        raise ValueError(f"Unknown theme {name!r}; expected one of {sorted(THEMES)}.") from None


def chrome_height(chrome: str) -> int:
    try:
        return CHROME_HEIGHT[chrome]
    except KeyError:
        raise ValueError(f"Unknown chrome {chrome!r}; expected one of {sorted(CHROME_HEIGHT)}.") from None


def _icon(rows: Sequence[str]) -> np.ndarray:
    bm = np.array([[ch == "#" for ch in row] for row in rows], dtype=bool)
    if bm.shape != (ICON_SIDE, ICON_SIDE):
        raise ValueError(f"Icon bitmap must be {ICON_SIDE}x{ICON_SIDE}, got {bm.shape}.")
    bm.setflags(write=False)
    return bm


ICONS: Dict[str, np.ndarray] = {
    "heart": _icon((
        "............",
        ".###....###.",
        "#####..#####",
        "############",
        "############",
        "############",
        ".##########.",
        "..########..",
        "...######...",
        "....####....",
        ".....##.....",
        "............",
    )),
    "bubble": _icon((
        "............",
        ".##########.",
        "############",
        "##........##",
        "##........##",
        "##........##",
        "##........##",
        "############",
        ".##########.",
        "..##........",
        ".##.........",
        "............",
    )),
    "repost": _icon((
        "............",
        "..#.........",
        ".###..#####.",
        "#.#.#.....#.",
        "..#.......#.",
        "..#.......#.",
        "..#.......#.",
        "..#.......#.",
        ".#.....#.#.#",
        ".#####..###.",
        ".........#..",
        "............",
    )),
}
METRIC_ICONS = ("heart", "bubble", "repost")


def solid(width: int, height: int, color: Sequence[int]) -> np.ndarray:
    """Opaque ``(height, width, 4)`` block of one colour."""
    out = np.empty((height, width, 4), dtype=np.uint8)
    out[..., :3] = np.asarray(color[:3], dtype=np.uint8)
    out[..., 3] = 255
    return out


def paint(canvas: np.ndarray, mask: np.ndarray, x: int, y: int, color: Sequence[int]) -> None:
    """Set ``color`` where ``mask`` is true, with the mask's origin at ``(x, y)``."""
    h, w = mask.shape
    window = canvas[y : y + h, x : x + w]
    window[mask, :3] = np.asarray(color[:3], dtype=np.uint8)


def _distance2(height: int, width: int, cx: int, cy: int) -> np.ndarray:
    # Doubled coordinates keep pixel-centre distances integral.
    yy, xx = np.mgrid[0:height, 0:width]
    return (2 * xx + 1 - 2 * cx) ** 2 + (2 * yy + 1 - 2 * cy) ** 2


def stories_bar(theme: Theme, avatars: Sequence[RGB]) -> np.ndarray:
    """Dark bar with four ringed avatar circles, at base size."""
    if len(avatars) != len(STORY_CENTERS_X):
        raise ValueError(f"Expected {len(STORY_CENTERS_X)} avatar colours, got {len(avatars)}.")
    out = solid(STORIES_W, STORIES_H, theme.bar_background)
    for cx, avatar in zip(STORY_CENTERS_X, avatars):
        d2 = _distance2(STORIES_H, STORIES_W, cx, STORY_CENTER_Y)
        ring = (d2 >= 4 * RING_INNER**2) & (d2 < 4 * RING_OUTER**2)
        face = d2 < 4 * AVATAR_RADIUS**2
        out[ring, :3] = theme.ring
        out[face, :3] = avatar
    return out


def metrics_bar(theme: Theme, counts: Sequence[str]) -> np.ndarray:
    """Like/comment/repost icons with low-contrast counters, at base size."""
    if len(counts) != len(METRIC_ICONS):
        raise ValueError(f"Expected {len(METRIC_ICONS)} counts, got {len(counts)}.")
    out = solid(METRICS_W, METRICS_H, theme.background)
    for gx, icon, count in zip(METRIC_GROUPS_X, METRIC_ICONS, counts):
        paint(out, ICONS[icon], gx, 2, theme.metric_icon)
        digits = render_text(count, 1)
        if digits.shape[1] > METRIC_GROUPS_X[1] - METRIC_GROUPS_X[0] - ICON_SIDE - 6:
            raise ValueError(f"Count {count!r} does not fit a metrics group.")
        paint(out, digits, gx + ICON_SIDE + 4, 4, theme.metric_digits)
    return out


def badge(theme: Theme, digit: str = BADGE_DIGIT) -> np.ndarray:
    """Red notification disc with a white digit; corners show the background."""
    out = solid(BADGE_SIDE, BADGE_SIDE, theme.background)
    half = BADGE_SIDE // 2
    disc = _distance2(BADGE_SIDE, BADGE_SIDE, half, half) < 4 * half**2
    out[disc, :3] = BADGE_RED
    paint(out, render_text(digit, 1), 8, 7, BADGE_WHITE)
    return out


def gradient_block(width: int, height: int) -> np.ndarray:
    """Horizontal gray ramp, a smooth stand-in for a photo."""
    if width > 1:
        ramp = GRADIENT_LO + (GRADIENT_HI - GRADIENT_LO) * np.arange(width) // (width - 1)
    else:
        ramp = np.full(1, GRADIENT_LO)
    out = np.empty((height, width, 4), dtype=np.uint8)
    out[..., :3] = ramp.astype(np.uint8)[None, :, None]
    out[..., 3] = 255
    return out


def mosaic_colors(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """``(rows, cols, 3)`` cell colours with red capped below the skin range."""
    colors = rng.integers(0, 256, size=(rows, cols, 3), dtype=np.int64)
    colors[..., 0] = colors[..., 0] * (MOSAIC_MAX_RED + 1) // 256
    return colors.astype(np.uint8)


def mosaic_block(rng: np.random.Generator, width: int, height: int) -> np.ndarray:
    """Random 8x8-cell mosaic, a busy stand-in for a photo."""
    rows = -(-height // MOSAIC_CELL)
    cols = -(-width // MOSAIC_CELL)
    cells = mosaic_colors(rng, rows, cols)
    full = np.repeat(np.repeat(cells, MOSAIC_CELL, axis=0), MOSAIC_CELL, axis=1)
    out = np.empty((height, width, 4), dtype=np.uint8)
    out[..., :3] = full[:height, :width]
    out[..., 3] = 255
    return out


def draw_chrome(canvas: np.ndarray, theme: Theme, chrome: str) -> None:
    """Paint the top chrome strip in place."""
    h = chrome_height(chrome)
    if chrome == "app":
        canvas[:h, :, :3] = theme.status_bar
    else:
        canvas[:h, :, :3] = URL_BAR
        ink = render_text(URL_TEXT, 1)
        if ink.shape[1] + 12 <= canvas.shape[1]:
            paint(canvas, ink, 12, (h - ink.shape[0]) // 2, URL_INK)


def element_mask(kind: ElementKind, theme: str = "twitter") -> np.ndarray:
    """Base-size render used as a mask image for ``kind``."""
    t = get_theme(theme)
    kind = ElementKind(kind)
    if kind is ElementKind.STORIES_BAR:
        return stories_bar(t, [(40, 40, 40), (60, 30, 90), (20, 70, 50), (80, 60, 20)])
    if kind is ElementKind.METRICS_BAR:
        return metrics_bar(t, MASK_COUNTS)
    if kind is ElementKind.BADGE:
        return badge(t)
    raise ValueError(f"No mask render for {kind.value}.")


def base_size(kind: ElementKind) -> Tuple[int, int]:
    """(width, height) of the base render for scalable element kinds."""
    sizes = {
        ElementKind.STORIES_BAR: (STORIES_W, STORIES_H),
        ElementKind.METRICS_BAR: (METRICS_W, METRICS_H),
        ElementKind.BADGE: (BADGE_SIDE, BADGE_SIDE),
    }
    try:
        return sizes[ElementKind(kind)]
    except KeyError:
        raise ValueError(f"{kind} has no base size.") from None
