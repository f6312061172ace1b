"""Executable torch modules built from a ModelSpec.

The module returns logits; a ModelSpec's trailing Softmax is applied by the
callers that need probabilities so the loss can use log-softmax directly.
"""

from __future__ import annotations

import math

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from .modelzoo.layers import (
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
from .modelzoo.shapes import layer_output

BN_EPS = 1e-3
BN_MOMENTUM = 0.1


def _same_padding(size: int, k: int, stride: int) -> tuple[int, int]:
    out = math.ceil(size / stride)
    total = max((out - 1) * stride + k - size, 0)
    return total // 2, total - total // 2


class SpecConv(nn.Module):
    def __init__(self, layer: Conv2D, in_shape):
        super().__init__()
        h, w, c = in_shape
        self.pad = None
        if layer.padding == SAME:
            top, bottom = _same_padding(h, layer.kernel, layer.stride)
            left, right = _same_padding(w, layer.kernel, layer.stride)
            self.pad = (left, right, top, bottom)
        self.conv = nn.Conv2d(c, layer.filters, layer.kernel, layer.stride)

    def forward(self, x):
        if self.pad is not None and any(self.pad):
            x = F.pad(x, self.pad)
        return self.conv(x)


class SpecPool(nn.Module):
    def __init__(self, layer: MaxPool, in_shape):
        super().__init__()
        h, w, _ = in_shape
        self.size, self.stride = layer.size, layer.stride
        self.pad = None
        if layer.padding == SAME:
            top, bottom = _same_padding(h, layer.size, layer.stride)
            left, right = _same_padding(w, layer.size, layer.stride)
            self.pad = (left, right, top, bottom)

    def forward(self, x):
        if self.pad is not None and any(self.pad):
            x = F.pad(x, self.pad, value=float("-inf"))
        return F.max_pool2d(x, self.size, self.stride)


class SeededDropout(nn.Module):
    """Inverted dropout drawing its masks from an explicit generator."""

    def __init__(self, rate: float):
        super().__init__()
        self.rate = rate
        self.generator: torch.Generator | None = None

    def forward(self, x):
        if not self.training or self.rate == 0.0:
            return x
        keep = 1.0 - self.rate
        noise = torch.rand(x.shape, generator=self.generator, dtype=x.dtype, device=x.device)
        return x * (noise < keep).to(x.dtype) / keep


class Branches(nn.Module):
    def __init__(self, branches):
        super().__init__()
        self.branches = nn.ModuleList(branches)

    def forward(self, x):
        return torch.cat([b(x) for b in self.branches], dim=1)


def _build(layers, shape):
    modules = []
    for layer in layers:
        if isinstance(layer, Conv2D):
            modules.append(SpecConv(layer, shape))
        elif isinstance(layer, BatchNorm):
            bn = nn.BatchNorm2d if len(shape) == 3 else nn.BatchNorm1d
            modules.append(bn(shape[-1], eps=BN_EPS, momentum=BN_MOMENTUM))
        elif isinstance(layer, ReLU):
            modules.append(nn.ReLU())
        elif isinstance(layer, MaxPool):
            modules.append(SpecPool(layer, shape))
        elif isinstance(layer, Dense):
            modules.append(nn.Linear(shape[0], layer.units))
        elif isinstance(layer, Flatten):
            modules.append(nn.Flatten())
        elif isinstance(layer, Dropout):
            modules.append(SeededDropout(layer.rate))
        elif isinstance(layer, Softmax):
            pass
        elif isinstance(layer, Concat):
            modules.append(Branches([_build(b, shape) for b in layer.branches]))
        else:
            raise TypeError(f"unsupported layer {layer!r}")
        shape = layer_output(layer, shape)
    return nn.Sequential(*modules)


class SpecNet(nn.Module):
    def __init__(self, spec: ModelSpec):
        super().__init__()
        self.spec = spec
        self.body = _build(spec.layers, spec.input_shape)

    def forward(self, x):
        return self.body(x)

    def set_dropout_generator(self, generator: torch.Generator | None) -> None:
        for m in self.modules():
            if isinstance(m, SeededDropout):
                m.generator = generator


def init_weights(net: nn.Module, rng: np.random.Generator) -> None:
    """He-uniform weights (limit sqrt(6 / fan_in)), zero biases, unit BN scale.

    Draws come from ``rng`` in module order, so a seed fixes every weight.
    """
    with torch.no_grad():
        for m in net.modules():
            if isinstance(m, (nn.Conv2d, nn.Linear)):
                w = m.weight
                fan_in = w[0].numel()
                limit = math.sqrt(6.0 / fan_in)
                values = rng.uniform(-limit, limit, size=tuple(w.shape))
                w.copy_(torch.from_numpy(values).to(w.dtype))
                m.bias.zero_()
            elif isinstance(m, (nn.BatchNorm1d, nn.BatchNorm2d)):
                m.reset_parameters()
                m.reset_running_stats()


def build_network(spec: ModelSpec, rng: np.random.Generator | None = None,
                  dtype: torch.dtype = torch.float32) -> SpecNet:
    net = SpecNet(spec).to(dtype)
    if rng is not None:
        init_weights(net, rng)
    return net


def to_batch(images: np.ndarray, dtype: torch.dtype = torch.float32) -> torch.Tensor:
    """(N, h, w) uint8 -> (N, 1, h, w) tensor scaled to [0, 1]."""
    arr = np.asarray(images)
    if arr.ndim == 2:
        arr = arr[None]
    return torch.from_numpy(arr.astype(np.float32) / 255.0).to(dtype).unsqueeze(1)


def cross_entropy(logits: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    """Mean categorical cross-entropy, -sum(y * log softmax(z)), over one-hot labels."""
    one_hot = F.one_hot(labels, logits.shape[1]).to(logits.dtype)
    return -(one_hot * torch.log_softmax(logits, dim=1)).sum(dim=1).mean()


def softmax(logits: torch.Tensor) -> torch.Tensor:
    return torch.softmax(logits, dim=1)
