"""Outer-border following on 8-connected foreground components."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ..errors import NoHandError
from .core import BinaryMask

# Neighbour offsets (drow, dcol) in counter-clockwise order on screen (rows grow downward),
# starting east.
_CCW = ((0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1))
_DIR_INDEX = {d: k for k, d in enumerate(_CCW)}
_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class Contour:
    """Outer boundary of one connected foreground component.

    ``boundary`` holds (x, y) points; ``area`` is the component's pixel count,
    not the polygon area of the boundary.
    """

    boundary: list[tuple[int, int]]
    area: int
    bbox: tuple[int, int, int, int]
    pixels: tuple[np.ndarray, np.ndarray] = field(repr=False, compare=False, default=None)

    def mask(self, shape: tuple[int, int]) -> BinaryMask:
        """Mask containing only this contour's component."""
        out = np.zeros(shape, dtype=np.uint8)
        rows, cols = self.pixels
        out[rows, cols] = 1
        return BinaryMask(out)


def trace_border(fg: np.ndarray, start: tuple[int, int]) -> list[tuple[int, int]]:
    """Follow the outer border of the component containing ``start``.

    ``start`` is (row, col) and must have a background west neighbour, which
    holds for the first pixel of a component in raster order. Returns (x, y)
    points. The chain is closed: its last point neighbours the first.
    """
    h, w = fg.shape

    def is_fg(r, c):
        return 0 <= r < h and 0 <= c < w and fg[r, c]

    def scan(center, from_dir, step):
        # examine the 8 neighbours of center beginning after from_dir, moving by step (+1 ccw, -1 cw)
        r, c = center
        k = _DIR_INDEX[from_dir]
        for i in range(1, 9):
            d = _CCW[(k + step * i) % 8]
            if is_fg(r + d[0], c + d[1]):
                return (r + d[0], c + d[1])
        return None

    r0, c0 = start
    # clockwise search from the west neighbour, which itself is background
    west = (0, -1)
    first = None
    k = _DIR_INDEX[west]
    for i in range(0, 8):
        d = _CCW[(k - i) % 8]
        if is_fg(r0 + d[0], c0 + d[1]):
            first = (r0 + d[0], c0 + d[1])
            break
    if first is None:
        return [(c0, r0)]

    chain = []
    prev, cur = first, start
    while True:
        back = (prev[0] - cur[0], prev[1] - cur[1])
        nxt = scan(cur, back, +1)
        chain.append((cur[1], cur[0]))
        if nxt == start and cur == first:
            break
        prev, cur = cur, nxt
    return chain


def extract_contours(mask: BinaryMask) -> list[Contour]:
    """One contour per 8-connected component, in raster order of the component's first pixel."""
    fg = mask.data.astype(bool)
    labels, n = ndimage.label(fg, structure=_EIGHT)
    if n == 0:
        return []
    flat = labels.ravel()
    ids, first_index = np.unique(flat, return_index=True)
    keep = ids != 0
    ids, first_index = ids[keep], first_index[keep]
    areas = np.bincount(flat, minlength=n + 1)

    order = np.argsort(flat, kind="stable")
    bounds = np.searchsorted(flat[order], np.arange(n + 2))
    width = fg.shape[1]

    contours = []
    for lab, start_flat in sorted(zip(ids, first_index), key=lambda t: t[1]):
        start = (int(start_flat // width), int(start_flat % width))
        boundary = trace_border(fg, start)
        xs = [p[0] for p in boundary]
        ys = [p[1] for p in boundary]
        members = order[bounds[lab]:bounds[lab + 1]]
        contours.append(
            Contour(
                boundary=boundary,
                area=int(areas[lab]),
                bbox=(min(xs), min(ys), max(xs), max(ys)),
                pixels=(members // width, members % width),
            )
        )
    return contours


def largest_contour(contours: list[Contour]) -> Contour:
    """Contour with the largest area; ties go to the smaller x_min, then y_min."""
    if not contours:
        raise NoHandError("no foreground contour found")
    return min(contours, key=lambda c: (-c.area, c.bbox[0], c.bbox[1]))
