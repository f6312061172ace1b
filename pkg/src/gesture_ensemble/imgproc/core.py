"""Raster containers, grayscale conversion, thresholding and background separation."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from ..errors import BackgroundNotInitialized, DimensionError, ParameterError

AUTO = "auto"

# ITU-R BT.601 luma weights
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def _check_2d(data: np.ndarray, kind: str) -> None:
    if data.ndim != 2:
        raise DimensionError(f"{kind} must be 2-D, got shape {data.shape}")
    if data.shape[0] == 0 or data.shape[1] == 0:
        raise DimensionError(f"{kind} has a zero dimension: {data.shape}")


@dataclass(frozen=True)
class GrayImage:
    """8-bit single-channel image stored as a (height, width) uint8 array."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        _check_2d(data, "GrayImage")
        if data.dtype != np.uint8:
            if np.any(data < 0) or np.any(data > 255):
                raise ParameterError("GrayImage intensities must lie in [0, 255]")
            data = data.astype(np.uint8)
        object.__setattr__(self, "data", data)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


@dataclass(frozen=True)
class BinaryMask:
    """Foreground mask with values 0 (background) and 1 (foreground)."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        _check_2d(data, "BinaryMask")
        if data.dtype == bool:
            data = data.astype(np.uint8)
        elif not np.all((data == 0) | (data == 1)):
            raise ParameterError("BinaryMask values must be 0 or 1")
        else:
            data = data.astype(np.uint8)
        object.__setattr__(self, "data", data)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def count(self) -> int:
        return int(self.data.sum())

    def to_image(self) -> GrayImage:
        """The {0, 255} rendering used when masks are written to disk."""
        return GrayImage(self.data * np.uint8(255))


Raster = Union[GrayImage, BinaryMask]


def round_half_up(x):
    """Round to nearest integer with halves going up; numpy's default rounds half to even."""
    return np.floor(np.asarray(x, dtype=np.float64) + 0.5)


def to_grayscale(frame: np.ndarray) -> GrayImage:
    """Convert an (h, w, 3) RGB uint8 frame to luma.

    A 2-D frame is taken to be grayscale already and is returned as-is.
    """
    frame = np.asarray(frame)
    if frame.ndim == 2:
        return GrayImage(frame)
    if frame.ndim != 3 or frame.shape[2] not in (3, 4):
        raise DimensionError(f"expected an (h, w, 3) frame, got {frame.shape}")
    if frame.shape[0] == 0 or frame.shape[1] == 0:
        raise DimensionError(f"frame has a zero dimension: {frame.shape}")
    rgb = frame[..., :3].astype(np.float64)
    r, g, b = LUMA_WEIGHTS
    luma = round_half_up(r * rgb[..., 0] + g * rgb[..., 1] + b * rgb[..., 2])
    return GrayImage(np.clip(luma, 0, 255).astype(np.uint8))


def otsu_threshold(img: GrayImage) -> int:
    """Threshold maximizing between-class variance over the 256-bin histogram.

    Pixels ``<= t`` form the background class. When the maximum is attained
    on a run of consecutive thresholds (e.g. a histogram with an empty gap),
    the middle of the first such run is returned.
    """
    hist = np.bincount(img.data.ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    prob = hist / total
    omega0 = np.cumsum(prob)
    mu_cum = np.cumsum(prob * np.arange(256))
    mu_total = mu_cum[-1]
    omega1 = 1.0 - omega0
    with np.errstate(divide="ignore", invalid="ignore"):
        # sigma_b^2 = (mu_T * w0 - mu(t))^2 / (w0 * w1)
        between = (mu_total * omega0 - mu_cum) ** 2 / (omega0 * omega1)
    between[~np.isfinite(between)] = 0.0
    best = between.max()
    if best <= 0.0:
        return 0
    tol = 1e-12 * best
    first = int(np.argmax(between >= best - tol))
    last = first
    while last + 1 < 256 and between[last + 1] >= best - tol:
        last += 1
    return (first + last) // 2


def threshold_binary(img: GrayImage, threshold: int | str = AUTO) -> BinaryMask:
    """Foreground where intensity is strictly above ``threshold`` (or Otsu's choice)."""
    if isinstance(threshold, str):
        if threshold.lower() != AUTO:
            raise ParameterError(f"unknown threshold mode {threshold!r}")
        threshold = otsu_threshold(img)
    if not 0 <= threshold <= 255:
        raise ParameterError(f"threshold must be in [0, 255], got {threshold}")
    return BinaryMask(img.data > threshold)


@dataclass(frozen=True)
class BackgroundModel:
    """Running-average background estimate for one video stream."""

    learning_rate: float = 0.05
    diff_threshold: float = 25.0
    accumulator: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if not 0.0 < self.learning_rate <= 1.0:
            raise ParameterError("learning_rate must be in (0, 1]")
        if self.diff_threshold < 0:
            raise ParameterError("diff_threshold must be non-negative")

    @property
    def initialized(self) -> bool:
        return self.accumulator is not None


def update_background(model: BackgroundModel, frame: GrayImage) -> BackgroundModel:
    """Blend ``frame`` into the accumulator; an empty model adopts the frame."""
    current = frame.data.astype(np.float64)
    if model.accumulator is None:
        return replace(model, accumulator=current)
    if model.accumulator.shape != current.shape:
        raise DimensionError(
            f"frame {current.shape} does not match background {model.accumulator.shape}"
        )
    rate = model.learning_rate
    return replace(model, accumulator=(1.0 - rate) * model.accumulator + rate * current)


def subtract_background(model: BackgroundModel, frame: GrayImage) -> BinaryMask:
    """Pixels whose absolute difference from the background exceeds the threshold."""
    if model.accumulator is None:
        raise BackgroundNotInitialized("background model has not seen a frame yet")
    if model.accumulator.shape != frame.shape:
        raise DimensionError(
            f"frame {frame.shape} does not match background {model.accumulator.shape}"
        )
    diff = np.abs(frame.data.astype(np.float64) - model.accumulator)
    return BinaryMask(diff > model.diff_threshold)
