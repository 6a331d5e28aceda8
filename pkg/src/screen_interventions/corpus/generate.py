"""Deterministic synthetic screens with ground truth.

A :class:`ScreenSpec` lists the planted elements and their positions; the
renderer draws chrome, then each element, and records one ground-truth entry
per element. All randomness comes from counter-based Philox streams keyed by
``(seed, stream)``, so a spec renders to the same bytes everywhere.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..core import Frame, Region
from ..imaging.gray import resize_rgba, scaled_size
from .elements import (
    BADGE_RED,
    BADGE_WHITE,
    CAPTION_INK,
    RGB,
    SKIN,
    ElementKind,
    Theme,
    badge,
    base_size,
    chrome_height,
    draw_chrome,
    get_theme,
    gradient_block,
    metrics_bar,
    mosaic_block,
    mosaic_colors,
    paint,
    solid,
    stories_bar,
)
from .glyphs import CHARSET, render_text, text_size

FRAME_INTERVAL_US = 33_333
# Bars and badges are planted at 1.0 with this probability, else at a
# continuous scale in [PLANT_MIN, PLANT_MAX] that fits the row.
PLANT_UNSCALED = 0.25
PLANT_MIN, PLANT_MAX = 0.8, 1.5
CAPTION_SCALE = 2
CAPTION_INSET = 6
MARGIN = 8
GAP = 8

_MASK64 = (1 << 64) - 1
LAYOUT_STREAM = 0
ELEMENT_STREAM = 1 << 32
CANVAS_STREAM = 1 << 48

WORDS = (
    "HELLO", "WORLD", "MORNING", "COFFEE", "TRAIN", "WEEKEND", "PHOTO", "GARDEN",
    "MUSIC", "CITY", "RAIN", "BOOK", "LUNCH", "PARK", "SUNSET", "DOG", "MOVIE",
    "TEAM", "GAME", "NEWS", "TODAY", "RECIPE", "BEACH", "FRIENDS", "2024", "12K",
)
SETTINGS_ITEMS = (
    "NOTIFICATIONS", "PRIVACY", "ACCOUNT", "DISPLAY", "LANGUAGE", "SECURITY",
    "STORAGE", "HELP", "ABOUT",
)
SCALABLE = (ElementKind.STORIES_BAR, ElementKind.METRICS_BAR, ElementKind.BADGE)


class SpecError(ValueError):
    """A screen spec whose planted elements overlap or leave the screen."""


class Layout(str, Enum):
    FEED = "feed"
    STORIES = "stories"
    SETTINGS = "settings"
    VIDEO_STILL = "video_still"
    MIXED = "mixed"


def rng_for(seed: int, stream: int) -> np.random.Generator:
    """Philox generator for one ``(seed, stream)`` counter key."""
    return np.random.Generator(np.random.Philox(key=((seed & _MASK64) << 64) | (stream & _MASK64)))


@dataclass(frozen=True)
class ElementSpec:
    """One planted element.

    ``scale`` is the resize factor for bars and badges and the integer glyph
    scale for text. Image blocks and colour patches take ``w`` and ``h``;
    an image block's ``text`` is a caption drawn inside it.
    """

    kind: ElementKind
    x: int
    y: int
    w: int = 0
    h: int = 0
    scale: float = 1.0
    text: str = ""
    style: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ElementKind(self.kind))
        object.__setattr__(self, "text", self.text.upper())
        if self.x < 0 or self.y < 0:
            raise SpecError(f"{self.kind.value} origin must be non-negative, got ({self.x}, {self.y}).")
        bad = sorted(set(self.text) - set(CHARSET))
        if bad:
            raise SpecError(f"{self.kind.value} text has characters outside the glyph atlas: {bad}.")
        if self.kind is ElementKind.TEXT:
            if not self.text.strip():
                raise SpecError("Text elements need non-blank text.")
            if self.scale < 1 or self.scale != int(self.scale):
                raise SpecError(f"Text scale must be a positive integer, got {self.scale}.")
        elif self.kind in SCALABLE:
            if self.scale <= 0:
                raise SpecError(f"{self.kind.value} scale must be positive, got {self.scale}.")
        elif self.w <= 0 or self.h <= 0:
            raise SpecError(f"{self.kind.value} needs a positive size, got {self.w}x{self.h}.")
        if self.kind is ElementKind.IMAGE_BLOCK and self.style not in ("gradient", "mosaic"):
            raise SpecError(f"Image block style must be 'gradient' or 'mosaic', got {self.style!r}.")

    def rect(self) -> Region:
        if self.kind in SCALABLE:
            return Region(self.x, self.y, *scaled_size(*base_size(self.kind), self.scale))
        if self.kind is ElementKind.TEXT:
            return Region(self.x, self.y, *text_size(self.text, int(self.scale)))
        return Region(self.x, self.y, self.w, self.h)

    def text_rect(self) -> Optional[Region]:
        """Where the text sits: the whole rect for text, the caption for image blocks."""
        if self.kind is ElementKind.TEXT:
            return self.rect()
        if self.kind is ElementKind.IMAGE_BLOCK and self.text:
            return Region(self.x + CAPTION_INSET, self.y + CAPTION_INSET, *text_size(self.text, CAPTION_SCALE))
        return None


@dataclass(frozen=True)
class ScreenSpec:
    seed: int
    layout: Layout
    width: int = 360
    height: int = 640
    elements: Tuple[ElementSpec, ...] = ()
    theme: str = "twitter"
    chrome: str = "app"

    def __post_init__(self) -> None:
        object.__setattr__(self, "layout", Layout(self.layout))
        object.__setattr__(self, "elements", tuple(self.elements))
        if not 0 <= self.seed <= _MASK64:
            raise SpecError(f"seed must be an unsigned 64-bit integer, got {self.seed}.")
        if self.width <= 0 or self.height <= 0:
            raise SpecError(f"Screen size must be positive, got {self.width}x{self.height}.")
        get_theme(self.theme)
        chrome_height(self.chrome)

    def check(self) -> None:
        """Raise :class:`SpecError` unless every element is on screen, below the chrome and disjoint."""
        top = chrome_height(self.chrome)
        rects = [el.rect() for el in self.elements]
        for el, r in zip(self.elements, rects):
            if not r.fits(self.width, self.height):
                raise SpecError(f"{el.kind.value} at {r} leaves the {self.width}x{self.height} screen.")
            if r.y < top:
                raise SpecError(f"{el.kind.value} at {r} overlaps the {self.chrome} chrome.")
            inner = el.text_rect()
            if inner is not None and not r.contains(inner):
                raise SpecError(f"Caption {el.text!r} does not fit its image block {r}.")
        for (i, a), (j, b) in itertools.combinations(enumerate(rects), 2):
            if a.intersection(b):
                raise SpecError(f"Elements {i} and {j} overlap: {a} and {b}.")


@dataclass(frozen=True)
class GroundTruthEntry:
    kind: ElementKind
    rect: Region
    transcript: str = ""
    colors: Tuple[RGB, ...] = ()
    text_rect: Optional[Region] = None


@dataclass(frozen=True)
class GroundTruth:
    entries: Tuple[GroundTruthEntry, ...] = ()

    def of_kind(self, kind: ElementKind) -> List[GroundTruthEntry]:
        kind = ElementKind(kind)
        return [e for e in self.entries if e.kind is kind]

    def text_entries(self) -> List[GroundTruthEntry]:
        """Entries carrying rendered text, in top-to-bottom order."""
        found = [e for e in self.entries if e.text_rect is not None]
        return sorted(found, key=lambda e: (e.text_rect.y, e.text_rect.x))

    def __len__(self) -> int:
        return len(self.entries)


def _avatars(rng: np.random.Generator) -> List[RGB]:
    # Avatars stay dark so the ring is the only bright shape in the bar.
    return [tuple(int(v) for v in rng.integers(0, 101, size=3)) for _ in range(4)]


def _render(spec: ScreenSpec, theme: Theme, index: int, el: ElementSpec, canvas: np.ndarray) -> GroundTruthEntry:
    r = el.rect()
    rng = rng_for(spec.seed, ELEMENT_STREAM + index)
    if el.kind is ElementKind.STORIES_BAR:
        canvas[r.slices()] = resize_rgba(stories_bar(theme, _avatars(rng)), el.scale)
        return GroundTruthEntry(el.kind, r, colors=(theme.bar_background, theme.ring))
    if el.kind is ElementKind.METRICS_BAR:
        counts = [str(int(c)) for c in rng.integers(0, 1000, size=3)]
        canvas[r.slices()] = resize_rgba(metrics_bar(theme, counts), el.scale)
        return GroundTruthEntry(el.kind, r, colors=(theme.metric_icon, theme.metric_digits))
    if el.kind is ElementKind.BADGE:
        canvas[r.slices()] = resize_rgba(badge(theme), el.scale)
        return GroundTruthEntry(el.kind, r, colors=(BADGE_RED, BADGE_WHITE))
    if el.kind is ElementKind.TEXT:
        paint(canvas, render_text(el.text, int(el.scale)), r.x, r.y, theme.text)
        return GroundTruthEntry(el.kind, r, el.text, (theme.text,), r)
    if el.kind is ElementKind.COLOR_PATCH:
        canvas[r.slices()] = solid(r.w, r.h, SKIN)
        return GroundTruthEntry(el.kind, r, colors=(SKIN,))

    if el.style == "gradient":
        canvas[r.slices()] = gradient_block(r.w, r.h)
    else:
        canvas[r.slices()] = mosaic_block(rng, r.w, r.h)
    caption = el.text_rect()
    if caption is None:
        return GroundTruthEntry(el.kind, r)
    paint(canvas, render_text(el.text, CAPTION_SCALE), caption.x, caption.y, CAPTION_INK)
    return GroundTruthEntry(el.kind, r, el.text, (CAPTION_INK,), caption)


def render_pixels(spec: ScreenSpec) -> Tuple[np.ndarray, GroundTruth]:
    """RGBA canvas and ground truth for ``spec``."""
    spec.check()
    theme = get_theme(spec.theme)
    canvas = solid(spec.width, spec.height, theme.background)
    draw_chrome(canvas, theme, spec.chrome)
    entries = [_render(spec, theme, i, el, canvas) for i, el in enumerate(spec.elements)]
    return canvas, GroundTruth(tuple(entries))


def generate_screen(spec: ScreenSpec, frame_id: int = 0, timestamp_us: int = 0) -> Tuple[Frame, GroundTruth]:
    canvas, truth = render_pixels(spec)
    return Frame.from_array(canvas, frame_id, timestamp_us), truth


def _canvas_rows(seed: int, screen: np.ndarray, start: int, count: int, cache: Dict[int, np.ndarray]) -> np.ndarray:
    """Rows ``start .. start+count`` of an endless feed whose rows ``0..H`` are the screen."""
    height, width = screen.shape[:2]
    out = np.empty((count, width, 4), dtype=np.uint8)
    cols = -(-width // 8)
    for i, row in enumerate(range(start, start + count)):
        if 0 <= row < height:
            out[i] = screen[row]
            continue
        block = row // 8
        if block not in cache:
            cells = mosaic_colors(rng_for(seed, CANVAS_STREAM + (block & 0xFFFFFFFF)), 1, cols)[0]
            cache[block] = np.repeat(cells, 8, axis=0)[:width]
        out[i, :, :3] = cache[block]
        out[i, :, 3] = 255
    return out


def generate_scroll_sequence(spec: ScreenSpec, shifts: Sequence[int]) -> List[Frame]:
    """The screen followed by one frame per vertical shift.

    Frame ``i+1`` shows frame ``i``'s content moved up by ``shifts[i]`` rows
    (down for negative shifts); rows scrolled into view come from a seeded
    mosaic feed, so every sequence is reproducible.
    """
    screen, _ = render_pixels(spec)
    height = spec.height
    for s in shifts:
        if abs(int(s)) >= height:
            raise SpecError(f"Shift {s} must be smaller than the screen height {height}.")
    offsets = [0] + list(itertools.accumulate(int(s) for s in shifts))
    cache: Dict[int, np.ndarray] = {}
    frames = []
    for i, offset in enumerate(offsets):
        px = _canvas_rows(spec.seed, screen, offset, height, cache)
        frames.append(Frame.from_array(px, i, i * FRAME_INTERVAL_US))
    return frames


class _Column:
    """Top-to-bottom placement of elements with a fixed gap."""

    def __init__(self, spec_w: int, spec_h: int, top: int):
        self.width = spec_w
        self.height = spec_h
        self.y = top
        self.elements: List[ElementSpec] = []

    def fits(self, els: Iterable[ElementSpec]) -> bool:
        return all(
            el.rect().right <= self.width - MARGIN and el.rect().bottom <= self.height - MARGIN for el in els
        )

    def add_row(self, *els: ElementSpec) -> bool:
        if not els or not self.fits(els):
            return False
        self.elements.extend(els)
        self.y = max(el.rect().bottom for el in els) + GAP
        return True


def _text_line(rng: np.random.Generator, col: _Column, x: int = MARGIN, max_words: int = 4) -> ElementSpec:
    scale = int(rng.choice([1, 2]))
    words = [str(w) for w in rng.choice(WORDS, size=int(rng.integers(1, max_words + 1)))]
    while len(words) > 1 and x + text_size(" ".join(words), scale)[0] > col.width - MARGIN:
        words.pop()
    return ElementSpec(ElementKind.TEXT, x, col.y, scale=scale, text=" ".join(words))


def _scaled(rng: np.random.Generator, kind: ElementKind, col: _Column, x: int = MARGIN) -> Optional[ElementSpec]:
    room = col.width - MARGIN - x
    # Milli-steps, rounded down so the planted width never exceeds the room.
    hi = min(PLANT_MAX, math.floor(1000 * room / base_size(kind)[0]) / 1000)
    if hi < PLANT_MIN:
        return None
    if hi >= 1.0 and rng.random() < PLANT_UNSCALED:
        return ElementSpec(kind, x, col.y, scale=1.0)
    scale = math.floor(1000 * rng.uniform(PLANT_MIN, hi)) / 1000
    return ElementSpec(kind, x, col.y, scale=max(PLANT_MIN, scale))


def _post(rng: np.random.Generator, col: _Column, allowed: frozenset) -> bool:
    if not col.add_row(_text_line(rng, col)):
        return False
    if ElementKind.IMAGE_BLOCK in allowed:
        block = ElementSpec(
            ElementKind.IMAGE_BLOCK, MARGIN, col.y, col.width - 2 * MARGIN, int(rng.integers(40, 81)), style="mosaic"
        )
        if not col.add_row(block):
            return False
    if ElementKind.METRICS_BAR in allowed:
        bar = _scaled(rng, ElementKind.METRICS_BAR, col)
        if bar is not None and not col.add_row(bar):
            return False
    return True


def _feed(rng: np.random.Generator, col: _Column, allowed: frozenset) -> None:
    if ElementKind.TEXT not in allowed:
        return
    while _post(rng, col, allowed):
        pass


def _settings(rng: np.random.Generator, col: _Column, allowed: frozenset) -> None:
    if ElementKind.TEXT not in allowed:
        return
    col.add_row(ElementSpec(ElementKind.TEXT, MARGIN, col.y, scale=2, text="SETTINGS"))
    for item in SETTINGS_ITEMS:
        el = ElementSpec(ElementKind.TEXT, MARGIN, col.y + 4, scale=int(rng.choice([1, 2])), text=item)
        if not col.add_row(el):
            break


def _captioned_block(rng: np.random.Generator, col: _Column, height: int) -> ElementSpec:
    w = col.width - 2 * MARGIN
    words = [str(v) for v in rng.choice(WORDS, size=2)]
    caption = " ".join(words)
    if text_size(caption, CAPTION_SCALE)[0] > w - 2 * CAPTION_INSET:
        caption = words[0]
    if text_size(caption, CAPTION_SCALE)[0] > w - 2 * CAPTION_INSET:
        caption = ""
    return ElementSpec(ElementKind.IMAGE_BLOCK, MARGIN, col.y, w, height, text=caption, style="gradient")


def _patches(rng: np.random.Generator, col: _Column, count: int) -> None:
    row, x = [], MARGIN
    for _ in range(count):
        w, h = (int(v) for v in rng.integers(24, 61, size=2))
        row.append(ElementSpec(ElementKind.COLOR_PATCH, x, col.y, w, h))
        x += w + GAP
    while row and not col.add_row(*row):
        row.pop()


def _video_still(rng: np.random.Generator, col: _Column, allowed: frozenset) -> None:
    if ElementKind.IMAGE_BLOCK in allowed:
        col.add_row(_captioned_block(rng, col, max(70, (col.height * 2) // 5)))
    if ElementKind.COLOR_PATCH in allowed:
        _patches(rng, col, int(rng.integers(1, 4)))
    if ElementKind.TEXT in allowed:
        col.add_row(_text_line(rng, col))


def _mixed(rng: np.random.Generator, col: _Column, allowed: frozenset) -> None:
    if ElementKind.STORIES_BAR in allowed:
        bar = _scaled(rng, ElementKind.STORIES_BAR, col)
        if bar is not None:
            col.add_row(bar)
    if ElementKind.BADGE in allowed:
        b = _scaled(rng, ElementKind.BADGE, col)
        if b is not None:
            row = [b]
            if ElementKind.TEXT in allowed:
                row.append(_text_line(rng, col, x=b.rect().right + GAP, max_words=2))
            if not col.add_row(*row):
                col.add_row(b)
    if ElementKind.TEXT in allowed:
        _post(rng, col, allowed)
    if ElementKind.COLOR_PATCH in allowed:
        _patches(rng, col, 1)
    if ElementKind.IMAGE_BLOCK in allowed:
        col.add_row(_captioned_block(rng, col, 70))
    _feed(rng, col, allowed)


def random_spec(
    seed: int,
    layout: Layout = Layout.FEED,
    width: int = 360,
    height: int = 640,
    theme: str = "twitter",
    chrome: str = "app",
    kinds: Optional[Iterable[ElementKind]] = None,
) -> ScreenSpec:
    """Lay out a plausible screen of ``layout`` from ``seed``.

    ``kinds`` restricts which element kinds may be planted; leaving out the
    bars and badges gives element-free screens.
    """
    layout = Layout(layout)
    allowed = frozenset(ElementKind(k) for k in kinds) if kinds is not None else frozenset(ElementKind)
    rng = rng_for(seed, LAYOUT_STREAM)
    col = _Column(width, height, chrome_height(chrome) + MARGIN)
    if layout is Layout.STORIES:
        if ElementKind.STORIES_BAR in allowed:
            bar = _scaled(rng, ElementKind.STORIES_BAR, col)
            if bar is not None:
                col.add_row(bar)
        _feed(rng, col, allowed)
    elif layout is Layout.FEED:
        _feed(rng, col, allowed)
    elif layout is Layout.SETTINGS:
        _settings(rng, col, allowed)
    elif layout is Layout.VIDEO_STILL:
        _video_still(rng, col, allowed)
    else:
        _mixed(rng, col, allowed)
    return ScreenSpec(seed, layout, width, height, tuple(col.elements), theme, chrome)
