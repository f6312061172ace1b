"""Directory-of-images datasets: manifests, stratified 60/20/20 splits, augmentation."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import DatasetError, ShapeError
from .imgproc.core import GrayImage, round_half_up, to_grayscale
from .imgproc.io import is_image_file, read_image

TRAIN_FRACTION = 0.8  # of all samples; the rest is test
FIT_FRACTION = 0.75  # of the training part; the rest is validation
MIN_CLASS_SIZE = 5


def make_rng(seed: int) -> np.random.Generator:
    """Seeded PCG64 generator; the same seed gives the same stream on every platform."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass
class DatasetManifest:
    root: Path
    classes: list[str]
    files: dict[str, list[str]]  # class -> paths relative to root
    image_size: tuple[int, int] | None = None  # (w, h), set for preprocessed datasets

    @property
    def counts(self) -> list[int]:
        return [len(self.files[c]) for c in self.classes]

    def __len__(self) -> int:
        return sum(self.counts)

    def samples(self) -> list[tuple[Path, int]]:
        """(path, label) for every sample; the list position is the sample index."""
        out = []
        for label, cls in enumerate(self.classes):
            out.extend((self.root / f, label) for f in self.files[cls])
        return out

    def labels(self) -> np.ndarray:
        return np.repeat(np.arange(len(self.classes)), self.counts)

    def to_json(self) -> dict:
        doc = {
            "root": str(self.root),
            "classes": list(self.classes),
            "counts": self.counts,
            "files": {c: list(self.files[c]) for c in self.classes},
        }
        if self.image_size is not None:
            doc["image_size"] = list(self.image_size)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> DatasetManifest:
        size = doc.get("image_size")
        return cls(
            root=Path(doc["root"]),
            classes=list(doc["classes"]),
            files={c: list(doc["files"][c]) for c in doc["classes"]},
            image_size=tuple(size) if size else None,
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> DatasetManifest:
        return cls.from_json(json.loads(Path(path).read_text()))


def ingest(root: str | Path) -> DatasetManifest:
    """Scan ``root/<class>/<image>``; classes and files are sorted lexicographically."""
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"dataset root {root} is not a directory")
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not class_dirs:
        raise DatasetError(f"dataset root {root} has no class directories")
    files = {}
    for d in class_dirs:
        images = sorted(p.relative_to(root).as_posix() for p in d.iterdir() if is_image_file(p))
        if not images:
            raise DatasetError(f"class {d.name!r} has no readable images")
        files[d.name] = images
    return DatasetManifest(root=root, classes=[d.name for d in class_dirs], files=files)


@dataclass
class Split:
    seed: int
    train: list[int]
    val: list[int]
    test: list[int]

    def to_json(self) -> dict:
        return asdict(self)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json()) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> Split:
        doc = json.loads(Path(path).read_text())
        return cls(seed=doc["seed"], train=doc["train"], val=doc["val"], test=doc["test"])


def split_sizes(n: int) -> tuple[int, int, int]:
    n_trainval = int(round_half_up(TRAIN_FRACTION * n))
    n_train = int(round_half_up(FIT_FRACTION * n_trainval))
    return n_train, n_trainval - n_train, n - n_trainval


def split(manifest: DatasetManifest, seed: int) -> Split:
    """Per-class shuffle; first 80% -> (75% train, 25% val), last 20% -> test."""
    rng = make_rng(seed)
    train, val, test = [], [], []
    offset = 0
    for cls, count in zip(manifest.classes, manifest.counts):
        if count < MIN_CLASS_SIZE:
            raise DatasetError(
                f"class {cls!r} has {count} samples; at least {MIN_CLASS_SIZE} are needed to stratify"
            )
        order = offset + rng.permutation(count)
        n_train, n_val, _ = split_sizes(count)
        train.extend(order[:n_train].tolist())
        val.extend(order[n_train:n_train + n_val].tolist())
        test.extend(order[n_train + n_val:].tolist())
        offset += count
    return Split(seed=seed, train=sorted(train), val=sorted(val), test=sorted(test))


def load_images(manifest: DatasetManifest, size: tuple[int, int] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """All samples as a (N, h, w) uint8 stack plus integer labels."""
    size = size or manifest.image_size
    images = []
    for path, _ in manifest.samples():
        img = to_grayscale(read_image(path)).data
        if size is not None and img.shape != (size[1], size[0]):
            raise ShapeError(f"{path} is {img.shape[1]}x{img.shape[0]}, expected {size[0]}x{size[1]}")
        images.append(img)
    if size is None and len({im.shape for im in images}) > 1:
        raise ShapeError("images differ in size; preprocess the dataset first")
    return np.stack(images), manifest.labels()


@dataclass(frozen=True)
class AugmentConfig:
    rotation_deg: float = 15.0
    zoom: float = 0.1
    shift_frac: float = 0.1
    hflip: bool = True
    vflip: bool = False

    def __post_init__(self):
        if self.rotation_deg < 0 or self.shift_frac < 0 or not 0 <= self.zoom < 1:
            raise ValueError("augmentation magnitudes must be non-negative and zoom < 1")

    @classmethod
    def disabled(cls) -> AugmentConfig:
        return cls(rotation_deg=0.0, zoom=0.0, shift_frac=0.0, hflip=False, vflip=False)


@dataclass(frozen=True)
class AffineParams:
    angle_deg: float = 0.0
    zoom: float = 1.0
    shift_x: float = 0.0  # pixels
    shift_y: float = 0.0
    hflip: bool = False
    vflip: bool = False

    @property
    def is_identity(self) -> bool:
        return (self.angle_deg == 0.0 and self.zoom == 1.0 and self.shift_x == 0.0
                and self.shift_y == 0.0 and not self.hflip and not self.vflip)


def sample_affine(shape: tuple[int, int], cfg: AugmentConfig, rng: np.random.Generator) -> AffineParams:
    h, w = shape
    # draw every variate unconditionally so the stream position never depends on cfg
    u = rng.uniform(-1.0, 1.0, size=4)
    flips = rng.random(2) < 0.5
    return AffineParams(
        angle_deg=float(u[0] * cfg.rotation_deg),
        zoom=float(1.0 + u[1] * cfg.zoom),
        shift_x=float(u[2] * cfg.shift_frac * w),
        shift_y=float(u[3] * cfg.shift_frac * h),
        hflip=bool(cfg.hflip and flips[0]),
        vflip=bool(cfg.vflip and flips[1]),
    )


def apply_affine(image: GrayImage, p: AffineParams) -> GrayImage:
    """Rotate (counter-clockwise) and zoom about the centre, shift, then flip.

    Pixels mapped from outside the frame are filled with 0.
    """
    data = image.data
    if p.angle_deg != 0.0 or p.zoom != 1.0 or p.shift_x != 0.0 or p.shift_y != 0.0:
        h, w = data.shape
        theta = math.radians(p.angle_deg)
        cos, sin = math.cos(theta), math.sin(theta)
        # inverse map in (row, col) coordinates: in = M @ (out - c - t) + c
        matrix = np.array([[cos, sin], [-sin, cos]]) / p.zoom
        center = np.array([(h - 1) / 2.0, (w - 1) / 2.0])
        shift = np.array([p.shift_y, p.shift_x])
        offset = center - matrix @ (center + shift)
        warped = ndimage.affine_transform(
            data.astype(np.float64), matrix, offset=offset, order=1,
            mode="constant", cval=0.0, prefilter=False,
        )
        data = np.clip(round_half_up(warped), 0, 255).astype(np.uint8)
    if p.hflip:
        data = data[:, ::-1]
    if p.vflip:
        data = data[::-1, :]
    return GrayImage(np.ascontiguousarray(data))


def augment(image: GrayImage, cfg: AugmentConfig, rng: np.random.Generator) -> GrayImage:
    """Random rotation, zoom, shift and flips; output has the input's dimensions."""
    params = sample_affine(image.shape, cfg, rng)
    if params.is_identity:
        return GrayImage(image.data.copy())
    return apply_affine(image, params)


def preprocess_dataset(manifest: DatasetManifest, out_dir: str | Path, cfg=None) -> tuple[DatasetManifest, list[dict]]:
    """Run the preprocessing chain over every sample, writing PNGs under ``out_dir``.

    Images in which no hand is found are left out of the processed manifest
    and listed in the returned skip list with the reason.
    """
    from .errors import NoHandError
    from .imgproc.io import write_image
    from .imgproc.pipeline import PreprocessConfig, preprocess

    cfg = cfg or PreprocessConfig()
    out_dir = Path(out_dir)
    files: dict[str, list[str]] = {}
    skipped = []
    for cls in manifest.classes:
        kept = []
        for rel in manifest.files[cls]:
            try:
                result = preprocess(read_image(manifest.root / rel), cfg)
            except NoHandError as exc:
                skipped.append({"class": cls, "file": rel, "reason": str(exc)})
                continue
            target = Path(rel).with_suffix(".png").as_posix()
            write_image(out_dir / target, result.image)
            kept.append(target)
        files[cls] = kept
    processed = DatasetManifest(root=out_dir, classes=list(manifest.classes), files=files, image_size=cfg.size)
    return processed, skipped
