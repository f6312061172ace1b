"""Exact Euclidean distance transform, palm localisation and hand cropping."""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from ..errors import NoHandError, ParameterError
from .core import BinaryMask, GrayImage, round_half_up

_INF = 1e20


@numba.njit(cache=True)
def _edt_1d(f, out, v, z):
    # Lower envelope of parabolas (Felzenszwalb & Huttenlocher); squared distances.
    n = f.shape[0]
    k = 0
    v[0] = 0
    z[0] = -_INF
    z[1] = _INF
    for q in range(1, n):
        s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k])
        while s <= z[k]:
            k -= 1
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k])
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = _INF
    k = 0
    for q in range(n):
        while z[k + 1] < q:
            k += 1
        d = q - v[k]
        out[q] = d * d + f[v[k]]


@numba.njit(cache=True)
def _edt_2d(fg):
    h, w = fg.shape
    # larger than any squared in-image distance, small enough that all arithmetic stays exact
    far = float((h + w) ** 2)
    grid = np.empty((h, w), dtype=np.float64)
    for r in range(h):
        for c in range(w):
            grid[r, c] = far if fg[r, c] else 0.0
    n = max(h, w)
    f = np.empty(n, dtype=np.float64)
    out = np.empty(n, dtype=np.float64)
    v = np.empty(n, dtype=np.int64)
    z = np.empty(n + 1, dtype=np.float64)
    for c in range(w):
        for r in range(h):
            f[r] = grid[r, c]
        _edt_1d(f[:h], out[:h], v, z)
        for r in range(h):
            grid[r, c] = out[r]
    for r in range(h):
        for c in range(w):
            f[c] = grid[r, c]
        _edt_1d(f[:w], out[:w], v, z)
        for c in range(w):
            grid[r, c] = out[c]
    return grid


def distance_transform(mask: BinaryMask) -> np.ndarray:
    """Euclidean distance from each foreground pixel to the nearest background pixel.

    Pixels outside the image count as background, so a foreground pixel on the
    border has distance 1. Background pixels map to 0.
    """
    padded = np.pad(mask.data.astype(np.bool_), 1, constant_values=False)
    squared = _edt_2d(padded)[1:-1, 1:-1]
    return np.sqrt(squared)


@dataclass(frozen=True)
class PalmGeometry:
    center: tuple[int, int]  # (x, y)
    radius: float


def palm_geometry(mask: BinaryMask) -> PalmGeometry:
    """Palm centre = maximum of the distance transform; radius = its value there.

    Ties resolve to the smallest row, then the smallest column.
    """
    if mask.count() == 0:
        raise NoHandError("mask has no foreground pixels")
    dist = distance_transform(mask)
    flat = int(np.argmax(dist))
    y, x = divmod(flat, mask.width)
    return PalmGeometry(center=(x, y), radius=float(dist[y, x]))


def crop_side(radius: float, expand: float) -> int:
    if expand <= 0:
        raise ParameterError(f"expand ratio must be positive, got {expand}")
    return max(1, int(round_half_up(2.0 * expand * radius)))


def crop_square(data: np.ndarray, center: tuple[int, int], side: int) -> np.ndarray:
    """``side`` x ``side`` window centred on ``center`` (x, y); out-of-image area is zero."""
    cx, cy = center
    x0 = cx - side // 2
    y0 = cy - side // 2
    out = np.zeros((side, side), dtype=data.dtype)
    h, w = data.shape
    sx0, sy0 = max(x0, 0), max(y0, 0)
    sx1, sy1 = min(x0 + side, w), min(y0 + side, h)
    if sx0 < sx1 and sy0 < sy1:
        out[sy0 - y0:sy1 - y0, sx0 - x0:sx1 - x0] = data[sy0:sy1, sx0:sx1]
    return out


def crop_hand(mask: BinaryMask, palm: PalmGeometry, expand: float = 1.4) -> BinaryMask:
    """Square crop of side round(2 * expand * radius) around the palm centre."""
    side = crop_side(palm.radius, expand)
    return BinaryMask(crop_square(mask.data, palm.center, side))


def crop_hand_gray(img: GrayImage, palm: PalmGeometry, expand: float = 1.4) -> GrayImage:
    side = crop_side(palm.radius, expand)
    return GrayImage(crop_square(img.data, palm.center, side))
