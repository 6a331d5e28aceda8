"""Average (mean) perceptual hash."""

from __future__ import annotations

import numpy as np

from .gray import GrayImage, resize_to

HASH_SIDE = 8


def average_hash(img: GrayImage) -> int:
    """64-bit average hash.

    The image is reduced to 8x8 by nearest-neighbour sampling; bit
    ``r*8 + c`` (counted from the least significant bit) is set when pixel
    ``(r, c)`` is strictly brighter than the mean. Flat images hash to 0.
    """
    small = resize_to(img, HASH_SIDE, HASH_SIDE).data.astype(np.float64)
    bits = (small > small.mean()).ravel()
    value = 0
    for k in np.flatnonzero(bits):
        value |= 1 << int(k)
    return value


def hamming(a: int, b: int) -> int:
    return bin(a ^ b).count("1")
