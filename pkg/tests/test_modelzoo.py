import json

import pytest

from gesture_ensemble.errors import ShapeError
from gesture_ensemble.modelzoo import (
    ARCHITECTURES,
    REPORTED_TOTALS,
    BatchNorm,
    Concat,
    Conv2D,
    Dense,
    Flatten,
    MaxPool,
    ModelSpec,
    ReLU,
    Softmax,
    alexnet_like,
    basic_cnn,
    count_parameters,
    googlenet_like,
    infer_shapes,
    inception,
    layer_params,
    summary,
    vggnet_like,
)
from gesture_ensemble.modelzoo.shapes import layer_output, sequence_params

# Published VGGNet-like layer table (Flatten corrected from the printed 8198 to 4*4*512).
TABLE_1 = [
    ("Conv2D", (64, 64, 64), 640),
    ("BatchNorm", (64, 64, 64), 256),
    ("Conv2D", (64, 64, 64), 36_928),
    ("BatchNorm", (64, 64, 64), 256),
    ("MaxPool", (32, 32, 64), 0),
    ("Conv2D", (32, 32, 128), 73_856),
    ("BatchNorm", (32, 32, 128), 512),
    ("Conv2D", (32, 32, 128), 147_584),
    ("BatchNorm", (32, 32, 128), 512),
    ("MaxPool", (16, 16, 128), 0),
    ("Conv2D", (16, 16, 256), 295_168),
    ("BatchNorm", (16, 16, 256), 1024),
    ("Conv2D", (16, 16, 256), 590_080),
    ("BatchNorm", (16, 16, 256), 1024),
    ("Conv2D", (16, 16, 256), 590_080),
    ("BatchNorm", (16, 16, 256), 1024),
    ("MaxPool", (8, 8, 256), 0),
    ("Conv2D", (8, 8, 512), 1_180_160),
    ("BatchNorm", (8, 8, 512), 2048),
    ("Conv2D", (8, 8, 512), 2_359_808),
    ("BatchNorm", (8, 8, 512), 2048),
    ("Conv2D", (8, 8, 512), 2_359_808),
    ("BatchNorm", (8, 8, 512), 2048),
    ("MaxPool", (4, 4, 512), 0),
    ("Flatten", (8192,), 0),
    ("Dense", (512,), 4_194_816),
    ("Dense", (512,), 262_656),
    ("Dense", (10,), 5130),
]
TABLE_1_KINDS = {"Conv2D", "BatchNorm", "MaxPool", "Flatten", "Dense"}


def table_rows(spec):
    return [
        (type(r.layer).__name__, r.output_shape, r.params)
        for r in summary(spec)
        if type(r.layer).__name__ in TABLE_1_KINDS
    ]


def test_vggnet_like_reproduces_table_1():
    spec = vggnet_like(10)
    assert table_rows(spec) == TABLE_1
    assert count_parameters(spec) == 12_107_466 == REPORTED_TOTALS["vggnet_like"]


def test_vggnet_like_class_count_only_touches_final_dense():
    rows16 = table_rows(vggnet_like(16))
    assert rows16[-1] == ("Dense", (16,), 512 * 16 + 16) == ("Dense", (16,), 8208)
    assert rows16[:-1] == TABLE_1[:-1]


def test_vggnet_like_uses_same_padding_stride_one_and_2x2_pools():
    for layer in vggnet_like().layers:
        if isinstance(layer, Conv2D):
            assert (layer.kernel, layer.stride, layer.padding) == (3, 1, "same")
        if isinstance(layer, MaxPool):
            assert (layer.size, layer.stride) == (2, 2)


def test_shape_rules():
    assert layer_output(MaxPool(2, 2), (64, 64, 64)) == (32, 32, 64)
    assert layer_output(Flatten(), (4, 4, 512)) == (8192,)
    assert layer_output(Conv2D(8, 3), (17, 17, 3)) == (17, 17, 8)
    assert layer_output(Conv2D(8, 3, padding="valid"), (17, 17, 3)) == (15, 15, 8)


def test_parameter_rules():
    assert layer_params(Conv2D(64, 3), (64, 64, 1)) == 640
    assert layer_params(BatchNorm(), (64, 64, 64)) == 256
    assert layer_params(Conv2D(64, 3), (64, 64, 64)) == 36_928
    assert layer_params(Dense(512), (8192,)) == 4_194_816
    assert sequence_params([], (64, 64, 1)) == 0
    for layer in (ReLU(), MaxPool(), Flatten(), Softmax()):
        assert layer_params(layer, (4, 4, 8)) == 0


@pytest.mark.parametrize("factory", [alexnet_like, googlenet_like, basic_cnn, vggnet_like])
@pytest.mark.parametrize("num_classes", [2, 10, 16])
def test_shape_inference_end_to_end(factory, num_classes):
    spec = factory(num_classes)
    assert infer_shapes(spec)[-1] == (num_classes,)
    assert spec.input_shape == (64, 64, 1)


@pytest.mark.parametrize("factory", [alexnet_like, googlenet_like, vggnet_like])
def test_class_count_change_only_alters_final_dense(factory):
    ten, sixteen = factory(10), factory(16)
    fan_in = infer_shapes(ten)[-3][0]
    assert count_parameters(sixteen) - count_parameters(ten) == 6 * (fan_in + 1)


def test_class_deltas_match_reported_totals_for_other_datasets():
    # Dataset-2 (16 classes) totals minus Dataset-1 (10 classes) totals
    assert count_parameters(vggnet_like(16)) - count_parameters(vggnet_like(10)) == 12_110_544 - 12_107_466
    assert count_parameters(alexnet_like(16)) - count_parameters(alexnet_like(10)) == 2_466_384 - 2_464_842
    assert count_parameters(googlenet_like(16)) - count_parameters(googlenet_like(10)) == 5_670_698 - 5_670_392


@pytest.mark.parametrize("name", ["alexnet_like", "googlenet_like"])
def test_reference_architectures_land_near_reported_totals(name):
    spec = {"alexnet_like": alexnet_like, "googlenet_like": googlenet_like}[name](10)
    reported = REPORTED_TOTALS[name]
    assert abs(count_parameters(spec) - reported) / reported < 0.10


def test_basic_cnn_baseline():
    assert 10**5 <= count_parameters(basic_cnn(10)) < 10**6
    assert count_parameters(basic_cnn(2)) < count_parameters(basic_cnn(10))


def test_inception_block_concat_semantics():
    block = inception(64, 96, 128, 16, 32, 32)
    assert layer_output(block, (16, 16, 128)) == (16, 16, 64 + 128 + 32 + 32)
    branch_total = sum(sequence_params(b, (16, 16, 128)) for b in block.branches)
    assert layer_params(block, (16, 16, 128)) == branch_total


def test_googlenet_like_has_four_branch_inception_blocks():
    blocks = [l for l in googlenet_like().layers if isinstance(l, Concat)]
    assert len(blocks) >= 2
    for block in blocks:
        assert len(block.branches) == 4
        kernels = [[l.kernel for l in b if isinstance(l, Conv2D)] for b in block.branches]
        assert kernels == [[1], [1, 3], [1, 5], [1]]
        assert isinstance(block.branches[3][0], MaxPool)


@pytest.mark.parametrize("c_in,reduce_to,filters", [(128, 96, 128), (256, 64, 192), (480, 16, 48)])
def test_one_by_one_reduction_saves_parameters(c_in, reduce_to, filters):
    reduced = (1 * 1 * c_in + 1) * reduce_to + (9 * reduce_to + 1) * filters
    direct = (9 * c_in + 1) * filters
    assert reduced < direct
    assert sequence_params([Conv2D(reduce_to, 1), Conv2D(filters, 3)], (8, 8, c_in)) == reduced
    assert sequence_params([Conv2D(filters, 3)], (8, 8, c_in)) == direct


def test_concat_branch_mismatch_is_a_shape_error():
    bad = Concat(((Conv2D(4, 1),), (MaxPool(2, 2), Conv2D(4, 1))))
    with pytest.raises(ShapeError):
        layer_output(bad, (8, 8, 3))


def test_spec_validation():
    with pytest.raises(ShapeError):
        ModelSpec("x", (8, 8, 1), (Flatten(), Dense(3)), 3)
    with pytest.raises(ShapeError):
        ModelSpec("x", (8, 8, 1), (Dense(3), Softmax()), 3)  # Dense on a spatial input


@pytest.mark.parametrize("name", sorted(ARCHITECTURES))
def test_spec_json_round_trip_and_hash(name):
    spec = ARCHITECTURES[name](10)
    doc = json.loads(json.dumps(spec.to_json()))
    again = ModelSpec.from_json(doc)
    assert again == spec
    assert again.content_hash() == spec.content_hash()
    assert ARCHITECTURES[name](11).content_hash() != spec.content_hash()
