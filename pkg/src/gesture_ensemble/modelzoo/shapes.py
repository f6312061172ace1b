"""Shape inference and parameter counting over layer specs."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import ShapeError
from .layers import (
    SAME,
    BatchNorm,
    Concat,
    Conv2D,
    Dense,
    Dropout,
    Flatten,
    MaxPool,
    ModelSpec,
    ReLU,
    Softmax,
)

Shape = tuple  # (h, w, c) before Flatten, (n,) after


def _window_out(size: int, k: int, stride: int, padding: str) -> int:
    if padding == SAME:
        return math.ceil(size / stride)
    out = (size - k) // stride + 1
    if out < 1:
        raise ShapeError(f"window {k} does not fit input of size {size}")
    return out


def _spatial(shape: Shape, layer) -> tuple[int, int, int]:
    if len(shape) != 3:
        raise ShapeError(f"{type(layer).__name__} needs a (h, w, c) input, got {shape}")
    return shape


def layer_output(layer, shape: Shape) -> Shape:
    if isinstance(layer, Conv2D):
        h, w, _ = _spatial(shape, layer)
        return (_window_out(h, layer.kernel, layer.stride, layer.padding),
                _window_out(w, layer.kernel, layer.stride, layer.padding), layer.filters)
    if isinstance(layer, MaxPool):
        h, w, c = _spatial(shape, layer)
        return (_window_out(h, layer.size, layer.stride, layer.padding),
                _window_out(w, layer.size, layer.stride, layer.padding), c)
    if isinstance(layer, Flatten):
        return (math.prod(shape),)
    if isinstance(layer, Dense):
        if len(shape) != 1:
            raise ShapeError(f"Dense needs a flat input, got {shape}; add Flatten")
        return (layer.units,)
    if isinstance(layer, (BatchNorm, ReLU, Dropout, Softmax)):
        return shape
    if isinstance(layer, Concat):
        outs = [sequence_output(branch, shape) for branch in layer.branches]
        spatial = {o[:-1] for o in outs}
        if any(len(o) != 3 for o in outs) or len(spatial) != 1:
            raise ShapeError(f"Concat branches disagree on spatial dims: {outs}")
        return (*outs[0][:2], sum(o[2] for o in outs))
    raise ShapeError(f"unknown layer {layer!r}")


def layer_params(layer, shape: Shape) -> int:
    """Parameter count of ``layer`` given its input shape.

    BatchNorm counts scale, shift, moving mean and moving variance per channel.
    """
    if isinstance(layer, Conv2D):
        c_in = _spatial(shape, layer)[2]
        return (layer.kernel * layer.kernel * c_in + 1) * layer.filters
    if isinstance(layer, BatchNorm):
        return 4 * shape[-1]
    if isinstance(layer, Dense):
        return (shape[0] + 1) * layer.units
    if isinstance(layer, Concat):
        return sum(sequence_params(branch, shape) for branch in layer.branches)
    return 0


def sequence_output(layers, shape: Shape) -> Shape:
    for layer in layers:
        shape = layer_output(layer, shape)
    return shape


def sequence_params(layers, shape: Shape) -> int:
    total = 0
    for layer in layers:
        total += layer_params(layer, shape)
        shape = layer_output(layer, shape)
    return total


def infer_shapes(spec: ModelSpec) -> list[Shape]:
    """Output shape after each top-level layer."""
    shapes = []
    shape = spec.input_shape
    for i, layer in enumerate(spec.layers):
        try:
            shape = layer_output(layer, shape)
        except ShapeError as exc:
            raise ShapeError(f"{spec.name} layer {i} ({type(layer).__name__}): {exc}") from exc
        shapes.append(shape)
    return shapes


@dataclass(frozen=True)
class LayerRow:
    index: int
    layer: object
    output_shape: Shape
    params: int


def summary(spec: ModelSpec) -> list[LayerRow]:
    """Per-layer output shape and parameter count."""
    rows = []
    shape = spec.input_shape
    for i, (layer, out) in enumerate(zip(spec.layers, infer_shapes(spec))):
        rows.append(LayerRow(i, layer, out, layer_params(layer, shape)))
        shape = out
    return rows


def count_parameters(spec: ModelSpec) -> int:
    return sum(row.params for row in summary(spec))


def format_summary(spec: ModelSpec) -> str:
    lines = [f"{spec.name}  input {spec.input_shape}"]
    for row in summary(spec):
        name = type(row.layer).__name__
        shape = "x".join(str(d) for d in row.output_shape)
        lines.append(f"  {name:<10} {shape:>12} {row.params:>12,}")
    lines.append(f"  {'total':<10} {'':>12} {count_parameters(spec):>12,}")
    return "\n".join(lines)
