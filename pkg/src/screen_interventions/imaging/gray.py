"""Gray working images: conversion, nearest-neighbour resizing, edge maps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..core import Frame, PixelFormat

# 4-connected structuring element: a foreground pixel is on the boundary when
# any of its edge neighbours is background.
_CROSS = ndimage.generate_binary_structure(2, 1)


@dataclass(frozen=True, eq=False)
class GrayImage:
    """One byte per pixel, row-major. Wraps a read-only ``(h, w)`` uint8 array."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.data, dtype=np.uint8, copy=True)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError(f"GrayImage needs a non-empty 2-D array, got shape {arr.shape}.")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_bytes(cls, width: int, height: int, data: bytes) -> "GrayImage":
        if len(data) != width * height:
            raise ValueError(f"Expected {width * height} bytes, got {len(data)}.")
        return cls(np.frombuffer(data, dtype=np.uint8).reshape(height, width))

    @property
    def width(self) -> int:
        return int(self.data.shape[1])

    @property
    def height(self) -> int:
        return int(self.data.shape[0])

    def crop(self, x: int, y: int, w: int, h: int) -> "GrayImage":
        return GrayImage(self.data[y : y + h, x : x + w])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self.data, other.data)

    __hash__ = None  # type: ignore[assignment]


def luma(rgb: np.ndarray) -> np.ndarray:
    """Integer ``round(0.299R + 0.587G + 0.114B)`` (half up) over the last axis."""
    rgb = rgb.astype(np.int64)
    return ((299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2] + 500) // 1000).astype(np.uint8)


def to_gray(frame: Frame) -> GrayImage:
    px = frame.pixels()
    if frame.pixel_format is PixelFormat.GRAY8:
        return GrayImage(px[..., 0])
    return GrayImage(luma(px))


def resize_to(img: GrayImage, width: int, height: int) -> GrayImage:
    """Nearest-neighbour resample to an explicit size (source index ``i*src//dst``)."""
    rows = (np.arange(height) * img.height) // height
    cols = (np.arange(width) * img.width) // width
    return GrayImage(img.data[np.ix_(rows, cols)])


def _scaled_dim(dim: int, scale: float) -> int:
    return max(1, int(np.floor(dim * scale + 1e-9)))


def scaled_size(width: int, height: int, scale: float) -> tuple[int, int]:
    """Output (width, height) of a nearest-neighbour resize by ``scale``."""
    return _scaled_dim(width, scale), _scaled_dim(height, scale)


def _source_index(n_out: int, n_in: int, scale: float) -> np.ndarray:
    idx = np.floor(np.arange(n_out) / scale + 1e-9).astype(np.int64)
    return np.minimum(idx, n_in - 1)


def resize_nearest(img: GrayImage, scale: float) -> GrayImage:
    """Nearest-neighbour resize by ``scale``; output dims ``floor(dim*scale)``, at least 1."""
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}.")
    if scale == 1.0:
        return img
    out_h, out_w = _scaled_dim(img.height, scale), _scaled_dim(img.width, scale)
    rows = _source_index(out_h, img.height, scale)
    cols = _source_index(out_w, img.width, scale)
    return GrayImage(img.data[np.ix_(rows, cols)])


def resize_rgba(pixels: np.ndarray, scale: float) -> np.ndarray:
    """Same index mapping as :func:`resize_nearest`, for ``(h, w, c)`` arrays."""
    if scale == 1.0:
        return pixels.copy()
    h, w = pixels.shape[:2]
    rows = _source_index(_scaled_dim(h, scale), h, scale)
    cols = _source_index(_scaled_dim(w, scale), w, scale)
    return pixels[np.ix_(rows, cols)]


def contourize(img: GrayImage, threshold: int = 128) -> GrayImage:
    """Boundary pixels (255) of the foreground ``pixel > threshold``; out-of-image counts as background."""
    fg = img.data > threshold
    interior = ndimage.binary_erosion(fg, structure=_CROSS, border_value=0)
    return GrayImage(np.where(fg & ~interior, 255, 0).astype(np.uint8))


def otsu_threshold(values: np.ndarray) -> int:
    """Otsu's threshold: classes are ``<= t`` and ``> t``."""
    hist = np.bincount(np.asarray(values, dtype=np.uint8).ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    omega = np.cumsum(hist)
    mu = np.cumsum(hist * np.arange(256))
    with np.errstate(divide="ignore", invalid="ignore"):
        between = (mu[-1] * omega - total * mu) ** 2 / (omega * (total - omega))
    between[~np.isfinite(between)] = 0.0
    return int(np.argmax(between))
