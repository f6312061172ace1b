"""Reading and writing 8-bit rasters (PNG, PGM)."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .core import BinaryMask, GrayImage

IMAGE_SUFFIXES = {".png", ".pgm", ".ppm", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"}


def read_image(path: str | Path) -> np.ndarray:
    """Load an image as uint8: (h, w) for grayscale sources, (h, w, 3) for colour."""
    with Image.open(path) as im:
        if im.mode in ("L", "1", "LA"):
            return np.asarray(im.convert("L"), dtype=np.uint8)
        if im.mode.startswith("I") or im.mode == "F":
            arr = np.asarray(im, dtype=np.float64)
            return np.clip(arr, 0, 255).astype(np.uint8)
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def read_gray(path: str | Path) -> GrayImage:
    from .core import to_grayscale

    return to_grayscale(read_image(path))


def write_image(path: str | Path, img: GrayImage | BinaryMask) -> None:
    """Write 8-bit grayscale; masks are stored as {0, 255}."""
    if isinstance(img, BinaryMask):
        img = img.to_image()
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(img.data).save(path)


def is_image_file(path: Path) -> bool:
    return path.is_file() and path.suffix.lower() in IMAGE_SUFFIXES
