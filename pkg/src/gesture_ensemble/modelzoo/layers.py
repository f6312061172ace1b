"""Declarative layer and model specifications."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, fields
from typing import ClassVar, Union

from ..errors import ShapeError

SAME = "same"
VALID = "valid"


class _Layer:
    kind: ClassVar[str]

    def to_json(self) -> dict:
        doc = {"type": self.kind}
        for f in fields(self):
            doc[f.name] = getattr(self, f.name)
        return doc


@dataclass(frozen=True)
class Conv2D(_Layer):
    kind: ClassVar[str] = "Conv2D"
    filters: int
    kernel: int = 3
    stride: int = 1
    padding: str = SAME

    def __post_init__(self):
        if min(self.filters, self.kernel, self.stride) < 1:
            raise ShapeError(f"invalid Conv2D {self}")
        if self.padding not in (SAME, VALID):
            raise ShapeError(f"unknown padding {self.padding!r}")


@dataclass(frozen=True)
class BatchNorm(_Layer):
    kind: ClassVar[str] = "BatchNorm"


@dataclass(frozen=True)
class ReLU(_Layer):
    kind: ClassVar[str] = "ReLU"


@dataclass(frozen=True)
class MaxPool(_Layer):
    kind: ClassVar[str] = "MaxPool"
    size: int = 2
    stride: int = 2
    padding: str = VALID

    def __post_init__(self):
        if min(self.size, self.stride) < 1:
            raise ShapeError(f"invalid MaxPool {self}")
        if self.padding not in (SAME, VALID):
            raise ShapeError(f"unknown padding {self.padding!r}")


@dataclass(frozen=True)
class Dense(_Layer):
    kind: ClassVar[str] = "Dense"
    units: int

    def __post_init__(self):
        if self.units < 1:
            raise ShapeError(f"invalid Dense {self}")


@dataclass(frozen=True)
class Flatten(_Layer):
    kind: ClassVar[str] = "Flatten"


@dataclass(frozen=True)
class Dropout(_Layer):
    kind: ClassVar[str] = "Dropout"
    rate: float = 0.2

    def __post_init__(self):
        if not 0.0 <= self.rate < 1.0:
            raise ShapeError(f"dropout rate must be in [0, 1), got {self.rate}")


@dataclass(frozen=True)
class Softmax(_Layer):
    kind: ClassVar[str] = "Softmax"


@dataclass(frozen=True)
class Concat(_Layer):
    """Parallel branches over the same input, joined along channels."""

    kind: ClassVar[str] = "Concat"
    branches: tuple[tuple, ...]

    def __post_init__(self):
        if not self.branches:
            raise ShapeError("Concat needs at least one branch")
        object.__setattr__(self, "branches", tuple(tuple(b) for b in self.branches))

    def to_json(self) -> dict:
        return {"type": self.kind, "branches": [[l.to_json() for l in b] for b in self.branches]}


LayerSpec = Union[Conv2D, BatchNorm, ReLU, MaxPool, Dense, Flatten, Dropout, Softmax, Concat]
_KINDS = {cls.kind: cls for cls in (Conv2D, BatchNorm, ReLU, MaxPool, Dense, Flatten, Dropout, Softmax, Concat)}


def layer_from_json(doc: dict) -> LayerSpec:
    doc = dict(doc)
    cls = _KINDS[doc.pop("type")]
    if cls is Concat:
        return Concat(tuple(tuple(layer_from_json(l) for l in b) for b in doc["branches"]))
    return cls(**doc)


@dataclass(frozen=True)
class ModelSpec:
    name: str
    input_shape: tuple[int, int, int]  # (h, w, channels)
    layers: tuple
    num_classes: int

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "input_shape", tuple(self.input_shape))
        if len(self.layers) < 2 or not isinstance(self.layers[-1], Softmax) \
                or self.layers[-2] != Dense(self.num_classes):
            raise ShapeError(f"{self.name}: must end with Dense({self.num_classes}) and Softmax")
        from .shapes import infer_shapes

        infer_shapes(self)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "input_shape": list(self.input_shape),
            "num_classes": self.num_classes,
            "layers": [l.to_json() for l in self.layers],
        }

    @classmethod
    def from_json(cls, doc: dict) -> ModelSpec:
        return cls(
            name=doc["name"],
            input_shape=tuple(doc["input_shape"]),
            layers=tuple(layer_from_json(l) for l in doc["layers"]),
            num_classes=doc["num_classes"],
        )

    def content_hash(self) -> str:
        canon = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()
