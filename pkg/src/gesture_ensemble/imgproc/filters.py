"""Median filtering and bilinear resizing for images and masks."""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import DimensionError, ParameterError
from .core import BinaryMask, GrayImage, Raster, round_half_up


def median_filter(img: Raster, k: int = 5) -> Raster:
    """k x k median with edge replication at the borders; k must be odd and >= 3."""
    if k < 3 or k % 2 == 0:
        raise ParameterError(f"median window must be odd and >= 3, got {k}")
    pad = k // 2
    padded = np.pad(img.data, pad, mode="edge")
    windows = sliding_window_view(padded, (k, k)).reshape(*img.shape, k * k)
    # odd window count: the median is an element of the window, no averaging
    med = np.partition(windows, (k * k) // 2, axis=-1)[..., (k * k) // 2]
    return type(img)(med.astype(np.uint8))


def _bilinear(data: np.ndarray, w: int, h: int) -> np.ndarray:
    in_h, in_w = data.shape
    src = data.astype(np.float64)

    def axis_coords(n_out, n_in):
        pos = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        pos = np.clip(pos, 0.0, n_in - 1)
        lo = np.floor(pos).astype(np.int64)
        hi = np.minimum(lo + 1, n_in - 1)
        return lo, hi, pos - lo

    y0, y1, fy = axis_coords(h, in_h)
    x0, x1, fx = axis_coords(w, in_w)
    fy = fy[:, None]
    fx = fx[None, :]
    top = src[y0][:, x0] * (1 - fx) + src[y0][:, x1] * fx
    bottom = src[y1][:, x0] * (1 - fx) + src[y1][:, x1] * fx
    return top * (1 - fy) + bottom * fy


def resize(img: Raster, w: int, h: int) -> Raster:
    """Bilinear resize (pixel-centre aligned).

    Masks are interpolated on a {0, 255} scale and re-thresholded at 127 so
    the result stays binary.
    """
    if w <= 0 or h <= 0:
        raise DimensionError(f"target size must be positive, got {w}x{h}")
    if (h, w) == img.shape:
        return type(img)(img.data.copy())
    if isinstance(img, BinaryMask):
        values = _bilinear(img.data * 255.0, w, h)
        return BinaryMask(values > 127)
    values = round_half_up(_bilinear(img.data, w, h))
    return GrayImage(np.clip(values, 0, 255).astype(np.uint8))
