"""Domain types shared by every module.

Frames, regions, detections and overlay plans are immutable value objects so
that hooks may read the same frame concurrently. The only algorithm here is
:func:`composite`, which applies an overlay plan to a frame and is what the
overlay layer on a device would show.

Blending is non-premultiplied source-over on integers, each channel computed
as ``(src*a + dst*(255-a)) / 255`` rounded half up, so composites are
byte-identical across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

from .corpus.glyphs import GLYPH_H, normalise_label, render_text, text_size


class BoundsError(ValueError):
    """An overlay op addresses pixels outside the frame."""

    def __init__(self, message: str, op_index: int | None = None):
        super().__init__(message)
        self.op_index = op_index


class DimensionError(ValueError):
    """Image dimensions are incompatible (template too large, size mismatch)."""


class DegenerateInputError(ValueError):
    """Input leaves nothing to work from (e.g. inpainting the whole frame)."""


class ConfigError(ValueError):
    """Invalid pipeline or intervention configuration."""


class PixelFormat(IntEnum):
    RGBA8 = 1
    GRAY8 = 2

    @property
    def bytes_per_pixel(self) -> int:
        return 4 if self is PixelFormat.RGBA8 else 1


RGBA = Tuple[int, int, int, int]
BLACK: RGBA = (0, 0, 0, 255)


@dataclass(frozen=True)
class Region:
    """Axis-aligned pixel rectangle, top-left anchored."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self) -> None:
        for name in ("x", "y", "w", "h"):
            object.__setattr__(self, name, int(getattr(self, name)))
        if self.x < 0 or self.y < 0:
            raise ValueError(f"Region origin must be non-negative, got ({self.x}, {self.y}).")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"Region size must be positive, got {self.w}x{self.h}.")

    @property
    def right(self) -> int:
        return self.x + self.w

    @property
    def bottom(self) -> int:
        return self.y + self.h

    @property
    def area(self) -> int:
        return self.w * self.h

    def fits(self, width: int, height: int) -> bool:
        return self.right <= width and self.bottom <= height

    def slices(self) -> Tuple[slice, slice]:
        """Row and column slices, for indexing ``(h, w, ...)`` arrays."""
        return slice(self.y, self.bottom), slice(self.x, self.right)

    def intersection(self, other: "Region") -> int:
        iw = min(self.right, other.right) - max(self.x, other.x)
        ih = min(self.bottom, other.bottom) - max(self.y, other.y)
        return max(iw, 0) * max(ih, 0)

    def iou(self, other: "Region") -> float:
        inter = self.intersection(other)
        return inter / float(self.area + other.area - inter)

    def contains(self, other: "Region") -> bool:
        return (
            self.x <= other.x
            and self.y <= other.y
            and other.right <= self.right
            and other.bottom <= self.bottom
        )

    def union(self, other: "Region") -> "Region":
        x, y = min(self.x, other.x), min(self.y, other.y)
        return Region(x, y, max(self.right, other.right) - x, max(self.bottom, other.bottom) - y)


@dataclass(frozen=True, eq=False)
class Frame:
    """One captured screen image.

    ``data`` is a row-major pixel buffer without padding; ids increase
    strictly within a session and ``timestamp_us`` counts from session start.
    """

    id: int
    timestamp_us: int
    width: int
    height: int
    pixel_format: PixelFormat
    data: bytes

    def __post_init__(self) -> None:
        object.__setattr__(self, "pixel_format", PixelFormat(self.pixel_format))
        object.__setattr__(self, "data", bytes(self.data))
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"Frame size must be positive, got {self.width}x{self.height}.")
        expected = self.width * self.height * self.pixel_format.bytes_per_pixel
        if len(self.data) != expected:
            raise ValueError(f"Frame data has {len(self.data)} bytes, expected {expected}.")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        return (
            self.id == other.id
            and self.timestamp_us == other.timestamp_us
            and self.width == other.width
            and self.height == other.height
            and self.pixel_format == other.pixel_format
            and self.data == other.data
        )

    __hash__ = None  # type: ignore[assignment]

    @classmethod
    def from_array(cls, pixels: np.ndarray, frame_id: int = 0, timestamp_us: int = 0) -> "Frame":
        """Build a frame from a ``(h, w, 4)`` RGBA or ``(h, w)`` gray uint8 array."""
        arr = np.ascontiguousarray(pixels, dtype=np.uint8)
        if arr.ndim == 2:
            fmt = PixelFormat.GRAY8
        elif arr.ndim == 3 and arr.shape[2] == 4:
            fmt = PixelFormat.RGBA8
        else:
            raise ValueError(f"Unsupported pixel array shape {arr.shape}.")
        return cls(frame_id, timestamp_us, arr.shape[1], arr.shape[0], fmt, arr.tobytes())

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width

    def pixels(self) -> np.ndarray:
        """Read-only ``(h, w, channels)`` view of the buffer."""
        bpp = self.pixel_format.bytes_per_pixel
        return np.frombuffer(self.data, dtype=np.uint8).reshape(self.height, self.width, bpp)

    def rgba(self) -> np.ndarray:
        """``(h, w, 4)`` RGBA copy; gray frames are expanded with opaque alpha."""
        px = self.pixels()
        if self.pixel_format is PixelFormat.RGBA8:
            return px.copy()
        out = np.empty((self.height, self.width, 4), dtype=np.uint8)
        out[..., :3] = px
        out[..., 3] = 255
        return out

    def with_pixels(self, pixels: np.ndarray) -> "Frame":
        """Same id and timestamp, new pixel content of the same format."""
        arr = np.ascontiguousarray(pixels, dtype=np.uint8)
        return Frame(self.id, self.timestamp_us, self.width, self.height, self.pixel_format, arr.tobytes())


@dataclass(frozen=True)
class Detection:
    """A scored, labelled region produced by a hook."""

    region: Region
    score: float
    scale: float = 1.0
    label: str = ""

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"Detection score must lie in [0, 1], got {self.score}.")
        if self.scale <= 0:
            raise ValueError(f"Detection scale must be positive, got {self.scale}.")


class OpKind(IntEnum):
    FILL_RECT = 1
    PATCH = 2
    VEIL = 3
    LABEL = 4


# Draw-order bands: inpainting under boxes under labels under veils.
Z_PATCH = 10
Z_FILL = 20
Z_LABEL = 30
Z_VEIL = 40


def _check_color(color: Sequence[int]) -> RGBA:
    rgba = tuple(int(c) for c in color)
    if len(rgba) != 4 or any(c < 0 or c > 255 for c in rgba):
        raise ValueError(f"Colour must be four bytes, got {color!r}.")
    return rgba  # type: ignore[return-value]


@dataclass(frozen=True)
class OverlayOp:
    """One draw operation of an overlay plan.

    Use the ``fill_rect``/``patch``/``veil``/``label`` constructors; they set
    the default z band for the kind.
    """

    kind: OpKind
    z: int
    region: Optional[Region] = None
    color: RGBA = BLACK
    payload: bytes = b""
    alpha: float = 1.0
    text: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", OpKind(self.kind))
        object.__setattr__(self, "color", _check_color(self.color))
        object.__setattr__(self, "payload", bytes(self.payload))
        if not -32768 <= self.z <= 32767:
            raise ValueError(f"z must fit a signed 16-bit integer, got {self.z}.")
        if self.kind is OpKind.VEIL:
            if self.region is not None:
                raise ValueError("VEIL covers the whole frame and takes no region.")
            if not 0.0 <= self.alpha <= 1.0:
                raise ValueError(f"VEIL alpha must lie in [0, 1], got {self.alpha}.")
        elif self.region is None:
            raise ValueError(f"{self.kind.name} needs a region.")
        if self.kind is OpKind.PATCH and len(self.payload) != self.region.area * 4:
            raise ValueError(
                f"PATCH payload has {len(self.payload)} bytes, expected {self.region.area * 4}."
            )

    @classmethod
    def fill_rect(cls, region: Region, color: Sequence[int] = BLACK, z: int = Z_FILL) -> "OverlayOp":
        return cls(OpKind.FILL_RECT, z, region=region, color=tuple(color))

    @classmethod
    def patch(cls, region: Region, pixels: np.ndarray | bytes, z: int = Z_PATCH) -> "OverlayOp":
        payload = pixels.astype(np.uint8).tobytes() if isinstance(pixels, np.ndarray) else pixels
        return cls(OpKind.PATCH, z, region=region, payload=payload)

    @classmethod
    def veil(cls, alpha: float, color: Sequence[int] = BLACK, z: int = Z_VEIL) -> "OverlayOp":
        return cls(OpKind.VEIL, z, color=tuple(color), alpha=float(alpha))

    @classmethod
    def label(cls, region: Region, text: str, color: Sequence[int] = (255, 255, 255, 255), z: int = Z_LABEL) -> "OverlayOp":
        return cls(OpKind.LABEL, z, region=region, color=tuple(color), text=text)

    def patch_pixels(self) -> np.ndarray:
        """PATCH payload as an ``(h, w, 4)`` array."""
        assert self.region is not None
        return np.frombuffer(self.payload, dtype=np.uint8).reshape(self.region.h, self.region.w, 4)


@dataclass(frozen=True)
class OverlayPlan:
    """Draw operations answering one frame, ascending by z.

    Equal-z ops keep their given order; :meth:`from_ops` produces that order
    from an unsorted list with a stable sort.
    """

    frame_id: int
    ops: Tuple[OverlayOp, ...] = ()

    def __post_init__(self) -> None:
        ops = tuple(self.ops)
        object.__setattr__(self, "ops", ops)
        if any(a.z > b.z for a, b in zip(ops, ops[1:])):
            raise ValueError("Overlay ops must be sorted ascending by z.")

    @classmethod
    def from_ops(cls, frame_id: int, ops: Iterable[OverlayOp]) -> "OverlayPlan":
        return cls(frame_id, tuple(sorted(ops, key=lambda op: op.z)))

    def merged(self, other: "OverlayPlan") -> "OverlayPlan":
        """z-merge of two plans for the same frame (self first among ties)."""
        if other.frame_id != self.frame_id:
            raise ValueError("Cannot merge plans for different frames.")
        return OverlayPlan.from_ops(self.frame_id, self.ops + other.ops)


@dataclass(frozen=True)
class LatencyRecord:
    """Timing of one frame through the server, in session microseconds.

    ``errors`` maps hook names to the failure that made the pipeline skip them.
    """

    frame_id: int
    t_receive_us: int
    t_plan_ready_us: int
    t_sent_us: int
    per_hook_us: Mapping[str, int] = field(default_factory=dict)
    errors: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.t_receive_us <= self.t_plan_ready_us <= self.t_sent_us:
            raise ValueError(
                "LatencyRecord timestamps must satisfy receive <= plan_ready <= sent, got "
                f"{self.t_receive_us}, {self.t_plan_ready_us}, {self.t_sent_us}."
            )

    @property
    def total_us(self) -> int:
        return self.t_sent_us - self.t_receive_us

    def as_row(self) -> Dict[str, object]:
        row: Dict[str, object] = {
            "frame_id": self.frame_id,
            "t_receive_us": self.t_receive_us,
            "t_plan_ready_us": self.t_plan_ready_us,
            "t_sent_us": self.t_sent_us,
            "total_us": self.total_us,
        }
        for name, us in self.per_hook_us.items():
            row[f"hook_{name}_us"] = us
        row["errors"] = "; ".join(f"{k}: {v}" for k, v in self.errors.items())
        return row


# ----------------------------
# Compositing
# ----------------------------

def _luma(color: Sequence[int]) -> int:
    r, g, b = (int(c) for c in color[:3])
    return (299 * r + 587 * g + 114 * b + 500) // 1000


def _source_channels(color: RGBA, fmt: PixelFormat) -> np.ndarray:
    # The alpha channel blends toward 255, which gives a_s + a_d * (1 - a_s).
    if fmt is PixelFormat.GRAY8:
        return np.array([_luma(color)], dtype=np.int64)
    return np.array([color[0], color[1], color[2], 255], dtype=np.int64)


def _blend(dst: np.ndarray, src: np.ndarray, alpha: int) -> np.ndarray:
    num = src * alpha + dst * (255 - alpha)
    return (2 * num + 255) // 510


def _label_mask(text: str, region: Region) -> np.ndarray:
    scale = max(1, region.h // GLYPH_H)
    label = normalise_label(text)
    while label and text_size(label, scale)[0] > region.w:
        label = label[:-1]
    mask = np.zeros((region.h, region.w), dtype=bool)
    if label:
        ink = render_text(label, scale)
        h = min(ink.shape[0], region.h)
        mask[:h, : ink.shape[1]] = ink[:h]
    return mask


def composite(frame: Frame, plan: OverlayPlan) -> Frame:
    """Apply ``plan`` to ``frame`` and return the rendered frame.

    Raises:
        ValueError: the plan answers a different frame.
        BoundsError: an op region falls outside the frame (``op_index`` set).
    """
    if plan.frame_id != frame.id:
        raise ValueError(f"Plan answers frame {plan.frame_id}, not frame {frame.id}.")
    for i, op in enumerate(plan.ops):
        if op.region is not None and not op.region.fits(frame.width, frame.height):
            raise BoundsError(f"Op {i} ({op.kind.name}) region {op.region} exceeds frame "
                              f"{frame.width}x{frame.height}.", op_index=i)
    if not plan.ops:
        return frame

    fmt = frame.pixel_format
    px = frame.pixels().astype(np.int64)
    for op in plan.ops:
        if op.kind is OpKind.VEIL:
            alpha = int(np.floor(op.alpha * op.color[3] + 0.5))
            px = _blend(px, _source_channels(op.color, fmt), alpha)
            continue

        rows, cols = op.region.slices()
        if op.kind is OpKind.FILL_RECT:
            px[rows, cols] = _blend(px[rows, cols], _source_channels(op.color, fmt), op.color[3])
        elif op.kind is OpKind.PATCH:
            patch = op.patch_pixels().astype(np.int64)
            if fmt is PixelFormat.GRAY8:
                gray = (299 * patch[..., 0] + 587 * patch[..., 1] + 114 * patch[..., 2] + 500) // 1000
                px[rows, cols] = gray[..., None]
            else:
                px[rows, cols] = patch
        elif op.kind is OpKind.LABEL:
            mask = _label_mask(op.text, op.region)
            window = px[rows, cols]
            window[mask] = _blend(window[mask], _source_channels(op.color, fmt), op.color[3])
            px[rows, cols] = window
    return frame.with_pixels(px.astype(np.uint8))
