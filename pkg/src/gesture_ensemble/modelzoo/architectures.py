"""The three ensemble members, a small baseline, and a micro model for gradient checks.

Only the VGGNet-like stack is published layer by layer. The AlexNet-like and
GoogLeNet-like stacks here are reference designs sized to land near the
published parameter totals (2,464,842 and 5,670,392 for ten classes); their
last hidden widths (256 and 50) follow from how those totals change with the
number of classes.
"""

from __future__ import annotations

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

INPUT_SHAPE = (64, 64, 1)
DROPOUT = 0.2


def _conv(filters, kernel=3):
    return [Conv2D(filters, kernel), BatchNorm(), ReLU()]


def _head(hidden, num_classes):
    layers = [Flatten()]
    for units in hidden:
        layers += [Dense(units), ReLU(), Dropout(DROPOUT)]
    return layers + [Dense(num_classes), Softmax()]


def _check(num_classes):
    if num_classes < 2:
        raise ValueError(f"need at least 2 classes, got {num_classes}")


def vggnet_like(num_classes: int = 10) -> ModelSpec:
    _check(num_classes)
    layers = []
    for filters, repeats in ((64, 2), (128, 2), (256, 3), (512, 3)):
        for _ in range(repeats):
            layers += _conv(filters)
        layers.append(MaxPool(2, 2))
    return ModelSpec("vggnet_like", INPUT_SHAPE, tuple(layers + _head((512, 512), num_classes)), num_classes)


def alexnet_like(num_classes: int = 10) -> ModelSpec:
    """Five conv blocks (5x5 stem, then 3x3), each pooled; dense 384 -> 256."""
    _check(num_classes)
    layers = []
    for filters, kernel in ((32, 5), (64, 3), (128, 3), (256, 3), (512, 3)):
        layers += _conv(filters, kernel) + [MaxPool(2, 2)]
    return ModelSpec("alexnet_like", INPUT_SHAPE, tuple(layers + _head((384, 256), num_classes)), num_classes)


def _conv_relu(filters, kernel):
    return [Conv2D(filters, kernel), ReLU()]


def inception(b1: int, r3: int, b3: int, r5: int, b5: int, pool_proj: int) -> Concat:
    """1x1 | 1x1 -> 3x3 | 1x1 -> 5x5 | 3x3 max-pool -> 1x1, concatenated.

    Branch convolutions carry no BatchNorm: stacked per-branch normalisation
    made eval-mode running statistics drift far from the batch statistics.
    """
    return Concat((
        tuple(_conv_relu(b1, 1)),
        tuple(_conv_relu(r3, 1) + _conv_relu(b3, 3)),
        tuple(_conv_relu(r5, 1) + _conv_relu(b5, 5)),
        tuple([MaxPool(3, 1, SAME)] + _conv_relu(pool_proj, 1)),
    ))


def googlenet_like(num_classes: int = 10) -> ModelSpec:
    _check(num_classes)
    layers = _conv(64) + [MaxPool(2, 2)] + _conv(128) + [MaxPool(2, 2)]
    layers += [
        inception(64, 96, 128, 16, 32, 32),      # 16x16 -> 256 channels
        inception(128, 128, 192, 32, 96, 64),    # -> 480
        MaxPool(2, 2),
        inception(192, 96, 208, 16, 48, 64),     # 8x8 -> 512
        inception(160, 112, 224, 24, 64, 64),    # -> 512
        inception(256, 160, 320, 32, 128, 128),  # -> 832
        MaxPool(2, 2),
        inception(256, 160, 320, 32, 128, 128),  # 4x4 -> 832
        inception(384, 192, 384, 48, 128, 128),  # -> 1024
    ]
    return ModelSpec("googlenet_like", INPUT_SHAPE, tuple(layers + _head((50,), num_classes)), num_classes)


def basic_cnn(num_classes: int = 10) -> ModelSpec:
    _check(num_classes)
    layers = []
    for filters in (16, 32, 64):
        layers += [Conv2D(filters), ReLU(), MaxPool(2, 2)]
    return ModelSpec("basic_cnn", INPUT_SHAPE, tuple(layers + _head((42,), num_classes)), num_classes)


def micro_cnn(num_classes: int = 3, size: int = 8) -> ModelSpec:
    """One conv and one dense layer; small enough for finite-difference checks."""
    layers = (Conv2D(4, 3), ReLU(), Flatten(), Dense(num_classes), Softmax())
    return ModelSpec("micro_cnn", (size, size, 1), layers, num_classes)


ARCHITECTURES = {
    "alexnet": alexnet_like,
    "vgg": vggnet_like,
    "googlenet": googlenet_like,
    "basic": basic_cnn,
}

# members of the ensemble, in the order they are trained
ENSEMBLE_MEMBERS = ("alexnet", "vgg", "googlenet")

# published totals for ten classes; VGGNet-like is reproduced exactly
REPORTED_TOTALS = {
    "vggnet_like": 12_107_466,
    "alexnet_like": 2_464_842,
    "googlenet_like": 5_670_392,
    "basic_cnn": 198_474,
    "ensemble": 20_242_700,
}
