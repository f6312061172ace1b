"""Segmentation and preprocessing of gesture images."""

from .contours import Contour, extract_contours, largest_contour, trace_border
from .core import (
    AUTO,
    BackgroundModel,
    BinaryMask,
    GrayImage,
    otsu_threshold,
    subtract_background,
    threshold_binary,
    to_grayscale,
    update_background,
)
from .distance import PalmGeometry, crop_hand, distance_transform, palm_geometry
from .filters import median_filter, resize
from .io import read_gray, read_image, write_image
from .pipeline import PreprocessConfig, PreprocessResult, hand_from_mask, preprocess

__all__ = [
    "AUTO",
    "BackgroundModel",
    "BinaryMask",
    "Contour",
    "GrayImage",
    "PalmGeometry",
    "PreprocessConfig",
    "PreprocessResult",
    "crop_hand",
    "distance_transform",
    "extract_contours",
    "hand_from_mask",
    "largest_contour",
    "median_filter",
    "otsu_threshold",
    "palm_geometry",
    "preprocess",
    "read_gray",
    "read_image",
    "resize",
    "subtract_background",
    "threshold_binary",
    "to_grayscale",
    "trace_border",
    "update_background",
    "write_image",
]
