"""Synthetic gesture-like data: filled shapes on a dark background, and moving-blob clips."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from .dataset import make_rng

SHAPES = ("disk", "square", "triangle")


def draw_shape(kind: str, size: int, rng: np.random.Generator, intensity: int = 220) -> np.ndarray:
    """One ``size`` x ``size`` frame with a randomly placed, sized and tilted shape."""
    img = Image.new("L", (size, size), 0)
    draw = ImageDraw.Draw(img)
    radius = rng.uniform(0.18, 0.3) * size
    margin = radius * 1.1
    cx = rng.uniform(margin, size - margin)
    cy = rng.uniform(margin, size - margin)
    tilt = rng.uniform(-15, 15)
    if kind == "disk":
        draw.ellipse([cx - radius, cy - radius, cx + radius, cy + radius], fill=intensity)
    elif kind in ("square", "triangle"):
        corners = 4 if kind == "square" else 3
        start = 45.0 if kind == "square" else -90.0
        pts = []
        for i in range(corners):
            a = math.radians(start + tilt + 360.0 * i / corners)
            pts.append((cx + radius * math.cos(a), cy + radius * math.sin(a)))
        draw.polygon(pts, fill=intensity)
    else:
        raise ValueError(f"unknown shape {kind!r}")
    data = np.asarray(img, dtype=np.int16)
    noise = rng.integers(-12, 13, size=data.shape)
    return np.clip(data + noise * (data > 0) + rng.integers(0, 8, size=data.shape), 0, 255).astype(np.uint8)


def make_shapes_dataset(root: str | Path, per_class: int = 100, size: int = 96, seed: int = 0) -> Path:
    """Write ``root/<shape>/<n>.png`` for the three shape classes."""
    root = Path(root)
    rng = make_rng(seed)
    for kind in SHAPES:
        (root / kind).mkdir(parents=True, exist_ok=True)
        for i in range(per_class):
            Image.fromarray(draw_shape(kind, size, rng)).save(root / kind / f"{i:04d}.png")
    return root


def moving_blob_clip(n_frames: int = 12, size: tuple[int, int] = (80, 60), radius: int = 9,
                     background_frames: int = 1) -> list[np.ndarray]:
    """RGB frames: ``background_frames`` empty frames, then a disk sliding left to right."""
    w, h = size
    frames = [np.zeros((h, w, 3), np.uint8) for _ in range(background_frames)]
    yy, xx = np.mgrid[:h, :w]
    for i in range(n_frames):
        cx = radius + 2 + i * (w - 2 * radius - 4) / max(1, n_frames - 1)
        disk = (xx - cx) ** 2 + (yy - h / 2) ** 2 <= radius ** 2
        frame = np.zeros((h, w, 3), np.uint8)
        frame[disk] = (230, 200, 180)
        frames.append(frame)
    return frames
