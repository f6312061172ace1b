"""Architecture specs, shape inference and parameter counting."""

from .architectures import (
    ARCHITECTURES,
    ENSEMBLE_MEMBERS,
    REPORTED_TOTALS,
    alexnet_like,
    basic_cnn,
    googlenet_like,
    inception,
    micro_cnn,
    vggnet_like,
)
from .layers import (
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
from .shapes import count_parameters, format_summary, infer_shapes, layer_params, summary

__all__ = [
    "ARCHITECTURES", "ENSEMBLE_MEMBERS", "REPORTED_TOTALS",
    "BatchNorm", "Concat", "Conv2D", "Dense", "Dropout", "Flatten", "MaxPool",
    "ModelSpec", "ReLU", "Softmax",
    "alexnet_like", "basic_cnn", "googlenet_like", "inception", "micro_cnn", "vggnet_like",
    "count_parameters", "format_summary", "infer_shapes", "layer_params", "summary",
]
