"""Score-averaging ensemble: mean of member softmax outputs, then argmax."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ArtifactError, ShapeError
from .trainer import TrainedModel


def _member_key(member) -> tuple[str, str]:
    digest = member.weights_hash() if hasattr(member, "weights_hash") else ""
    return (member.name, digest)


def average_scores(member_scores) -> np.ndarray:
    """Arithmetic mean of equally-shaped score arrays, summed in the order given."""
    total = np.zeros_like(np.asarray(member_scores[0], dtype=np.float64))
    for scores in member_scores:
        total = total + np.asarray(scores, dtype=np.float64)
    return total / len(member_scores)


@dataclass
class EnsembleModel:
    """Members are any objects with ``name``, ``num_classes``, ``input_shape`` and
    ``predict_proba``; they are kept sorted by (name, weights hash) so the
    averaged scores do not depend on the order they were supplied in.
    """

    members: list
    class_count: int
    classes: list[str] | None = None
    _keys: list = field(default_factory=list, repr=False)

    @property
    def name(self) -> str:
        return "ensemble"

    @property
    def num_classes(self) -> int:
        return self.class_count

    @property
    def input_shape(self):
        return self.members[0].input_shape

    def parameter_count(self) -> int:
        return sum(m.parameter_count() for m in self.members)

    def member_scores(self, images: np.ndarray) -> list[np.ndarray]:
        return [np.asarray(m.predict_proba(images), dtype=np.float64) for m in self.members]

    def predict_proba(self, images: np.ndarray) -> np.ndarray:
        images = np.asarray(images)
        h, w, _ = self.input_shape
        if images.shape[-2:] != (h, w):
            raise ShapeError(f"ensemble expects {h}x{w} inputs, got {images.shape[-2:]}")
        return average_scores(self.member_scores(images))


def build_ensemble(members, classes: list[str] | None = None) -> EnsembleModel:
    members = list(members)
    if not members:
        raise ValueError("an ensemble needs at least one member")
    counts = {m.num_classes for m in members}
    if len(counts) != 1:
        raise ShapeError(f"members disagree on the number of classes: {sorted(counts)}")
    shapes = {tuple(m.input_shape) for m in members}
    if len(shapes) != 1:
        raise ShapeError(f"members disagree on the input shape: {sorted(shapes)}")
    if classes is not None and len(classes) != counts.copy().pop():
        raise ShapeError(f"{len(classes)} class names for {counts.pop()} outputs")
    ordered = sorted(members, key=_member_key)
    return EnsembleModel(ordered, counts.pop(), classes, [_member_key(m) for m in ordered])


def ensemble_scores(e: EnsembleModel, image: np.ndarray) -> np.ndarray:
    """Averaged probability vector for one (h, w) image."""
    image = np.asarray(image)
    if image.ndim != 2:
        raise ShapeError(f"expected a single (h, w) image, got {image.shape}")
    return e.predict_proba(image[None])[0]


def predict_label(e: EnsembleModel, image: np.ndarray) -> tuple[int, float]:
    """Argmax of the averaged scores (lowest index on ties) and its probability."""
    scores = ensemble_scores(e, image)
    label = int(np.argmax(scores))
    return label, float(scores[label])


def save_ensemble(path: str | Path, member_dirs: list[str | Path], classes: list[str] | None = None) -> Path:
    """Write the ensemble manifest: ordered member artifact paths plus content hashes."""
    path = Path(path)
    entries = []
    for d in member_dirs:
        meta = json.loads((Path(d) / "meta.json").read_text())
        entries.append({
            "name": meta["name"],
            "path": str(Path(d).resolve().relative_to(path.parent.resolve())
                        if Path(d).resolve().is_relative_to(path.parent.resolve()) else Path(d).resolve()),
            "spec_hash": meta["spec_hash"],
            "weights_hash": meta["weights_hash"],
        })
    doc = {"members": entries, "classes": classes}
    path.write_text(json.dumps(doc, indent=1) + "\n")
    return path


def load_ensemble(path: str | Path) -> EnsembleModel:
    path = Path(path)
    if not path.is_file():
        raise ArtifactError(f"missing ensemble manifest {path}")
    doc = json.loads(path.read_text())
    members = []
    for entry in doc["members"]:
        member_dir = Path(entry["path"])
        if not member_dir.is_absolute():
            member_dir = path.parent / member_dir
        model = TrainedModel.load(member_dir)
        if model.spec.content_hash() != entry["spec_hash"] or model.weights_hash() != entry["weights_hash"]:
            raise ArtifactError(f"{member_dir} does not match the hashes recorded in {path}")
        members.append(model)
    return build_ensemble(members, doc.get("classes"))
