"""The offline preprocessing chain, shared verbatim by the live pipeline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NoHandError, ParameterError
from .contours import Contour, extract_contours, largest_contour
from .core import AUTO, BinaryMask, GrayImage, threshold_binary, to_grayscale
from .distance import PalmGeometry, crop_hand, crop_hand_gray, palm_geometry
from .filters import median_filter, resize


@dataclass(frozen=True)
class PreprocessConfig:
    threshold: int | str = AUTO
    median_k: int = 5
    expand_ratio: float = 1.4
    size: tuple[int, int] = (64, 64)  # (w, h)
    # False: median filter, then crop and resize. True: resize, then filter.
    filter_after_resize: bool = False
    # components smaller than this never count as a hand
    min_hand_area: int = 1
    # "mask" feeds the {0, 255} hand silhouette to the networks, "gray" the masked intensities
    output: str = "mask"

    def __post_init__(self):
        if self.output not in ("mask", "gray"):
            raise ParameterError(f"output must be 'mask' or 'gray', got {self.output!r}")
        if self.median_k and (self.median_k < 3 or self.median_k % 2 == 0):
            raise ParameterError(f"median_k must be odd and >= 3 (or 0 to disable), got {self.median_k}")


@dataclass(frozen=True)
class PreprocessResult:
    image: GrayImage
    contour: Contour
    palm: PalmGeometry


def hand_from_mask(
    mask: BinaryMask, cfg: PreprocessConfig, gray: GrayImage | None = None
) -> PreprocessResult:
    """Largest component -> median filter -> palm -> square crop -> resize."""
    contours = [c for c in extract_contours(mask) if c.area >= cfg.min_hand_area]
    hand = largest_contour(contours)
    region = hand.mask(mask.shape)
    if cfg.median_k and not cfg.filter_after_resize:
        region = median_filter(region, cfg.median_k)
    if region.count() == 0:
        raise NoHandError("hand region vanished after median filtering")
    palm = palm_geometry(region)
    w, h = cfg.size
    if cfg.output == "gray":
        if gray is None:
            raise ParameterError("gray output needs the source image")
        masked = GrayImage(gray.data * region.data)
        out = resize(crop_hand_gray(masked, palm, cfg.expand_ratio), w, h)
    else:
        out = resize(crop_hand(region, palm, cfg.expand_ratio), w, h).to_image()
    if cfg.median_k and cfg.filter_after_resize:
        out = median_filter(out, cfg.median_k)
    return PreprocessResult(image=out, contour=hand, palm=palm)


def preprocess(frame: np.ndarray | GrayImage, cfg: PreprocessConfig = PreprocessConfig()) -> PreprocessResult:
    """Full offline chain for one image: grayscale, threshold, then ``hand_from_mask``."""
    gray = frame if isinstance(frame, GrayImage) else to_grayscale(frame)
    mask = threshold_binary(gray, cfg.threshold)
    return hand_from_mask(mask, cfg, gray)
