"""Border following on binary images (Suzuki & Abe topological analysis).

Foreground is 8-connected, background 4-connected. Every foreground
component yields one outer border and every hole one hole border. Outer
borders are returned clockwise and holes counter-clockwise, as seen on a
screen (y grows downward).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .gray import GrayImage

Point = Tuple[int, int]

# Neighbour offsets (drow, dcol) in clockwise screen order, starting east.
_NEIGHBOURS: Tuple[Tuple[int, int], ...] = (
    (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1),
)
_DIRECTION = {off: k for k, off in enumerate(_NEIGHBOURS)}


@dataclass(frozen=True)
class Contour:
    points: Tuple[Point, ...]  # (x, y) pixel coordinates, closed implicitly
    is_hole: bool

    def signed_area(self) -> float:
        """Shoelace area; positive means clockwise on screen."""
        pts = self.points
        acc = 0
        for (x0, y0), (x1, y1) in zip(pts, pts[1:] + pts[:1]):
            acc += x0 * y1 - x1 * y0
        return acc / 2.0


@dataclass(frozen=True)
class ContourSet:
    contours: Tuple[Contour, ...] = ()

    @property
    def outer(self) -> List[Contour]:
        return [c for c in self.contours if not c.is_hole]

    @property
    def holes(self) -> List[Contour]:
        return [c for c in self.contours if c.is_hole]

    def __len__(self) -> int:
        return len(self.contours)


def _follow(f: List[List[int]], i: int, j: int, i2: int, j2: int, nbd: int) -> List[Point]:
    """Follow one border from (i, j), with (i2, j2) the zero pixel that triggered it."""
    start = _DIRECTION[(i2 - i, j2 - j)]
    found = None
    for k in range(8):
        di, dj = _NEIGHBOURS[(start + k) % 8]
        if f[i + di][j + dj] != 0:
            found = (i + di, j + dj)
            break
    if found is None:
        f[i][j] = -nbd
        return [(j - 1, i - 1)]

    i1, j1 = found
    i2, j2 = i1, j1
    i3, j3 = i, j
    points: List[Point] = []
    while True:
        points.append((j3 - 1, i3 - 1))
        # Counter-clockwise scan around (i3, j3), starting after (i2, j2).
        k0 = _DIRECTION[(i2 - i3, j2 - j3)]
        east_zero_examined = False
        i4 = j4 = -1
        for step in range(1, 9):
            k = (k0 - step) % 8
            di, dj = _NEIGHBOURS[k]
            if f[i3 + di][j3 + dj] != 0:
                i4, j4 = i3 + di, j3 + dj
                break
            if k == 0:
                east_zero_examined = True
        if east_zero_examined:
            f[i3][j3] = -nbd
        elif f[i3][j3] == 1:
            f[i3][j3] = nbd
        if (i4, j4) == (i, j) and (i3, j3) == (i1, j1):
            return points
        i2, j2 = i3, j3
        i3, j3 = i4, j4


def trace_contours(binary: GrayImage) -> ContourSet:
    """Trace all outer and hole borders of a 0/255 (any non-zero is foreground) image."""
    fg = (binary.data != 0).astype(np.int64)
    padded = np.zeros((fg.shape[0] + 2, fg.shape[1] + 2), dtype=np.int64)
    padded[1:-1, 1:-1] = fg
    f = padded.tolist()
    rows, cols = fg.shape

    contours: List[Contour] = []
    nbd = 1
    for i in range(1, rows + 1):
        row = f[i]
        for j in range(1, cols + 1):
            v = row[j]
            if v == 1 and row[j - 1] == 0:
                is_hole, i2, j2 = False, i, j - 1
            elif v >= 1 and row[j + 1] == 0:
                is_hole, i2, j2 = True, i, j + 1
            else:
                continue
            nbd += 1
            points = _follow(f, i, j, i2, j2, nbd)
            contour = Contour(tuple(points), is_hole)
            area = contour.signed_area()
            # Orientation: outer clockwise (positive), holes counter-clockwise.
            if (area < 0 and not is_hole) or (area > 0 and is_hole):
                contour = Contour(tuple(reversed(points)), is_hole)
            contours.append(contour)
    return ContourSet(tuple(contours))
