import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from gesture_ensemble.dataset import (
    AffineParams,
    AugmentConfig,
    DatasetManifest,
    Split,
    apply_affine,
    augment,
    ingest,
    make_rng,
    split,
    split_sizes,
)
from gesture_ensemble.errors import DatasetError
from gesture_ensemble.imgproc import GrayImage


def _write_tree(root, layout):
    for cls, n in layout.items():
        (root / cls).mkdir(parents=True)
        for i in range(n):
            Image.fromarray(np.full((4, 4), i, np.uint8)).save(root / cls / f"{i}.png")


def _fake_manifest(counts):
    classes = [f"c{i}" for i in range(len(counts))]
    files = {c: [f"{c}/{j}.png" for j in range(n)] for c, n in zip(classes, counts)}
    return DatasetManifest(root=".", classes=classes, files=files)


def test_ingest_small_tree(tmp_path):
    _write_tree(tmp_path, {"b": 2, "a": 3})
    (tmp_path / "a" / "notes.txt").write_text("not an image")
    m = ingest(tmp_path)
    assert m.classes == ["a", "b"]
    assert m.counts == [3, 2]
    assert len(m) == 5
    assert m.labels().tolist() == [0, 0, 0, 1, 1]


def test_ingest_reports_empty_class(tmp_path):
    _write_tree(tmp_path, {"a": 2})
    (tmp_path / "hollow").mkdir()
    with pytest.raises(DatasetError, match="hollow"):
        ingest(tmp_path)
    with pytest.raises(DatasetError):
        ingest(tmp_path / "missing")


def test_manifest_json_round_trip(tmp_path):
    _write_tree(tmp_path / "data", {"a": 2, "b": 1})
    m = ingest(tmp_path / "data")
    m.save(tmp_path / "m.json")
    doc = json.loads((tmp_path / "m.json").read_text())
    assert set(doc) == {"root", "classes", "counts", "files"}
    again = DatasetManifest.load(tmp_path / "m.json")
    assert again.to_json() == m.to_json()


def test_split_dataset_one_scale():
    m = _fake_manifest([2000] * 10)
    assert len(m) == 20_000
    s = split(m, seed=7)
    assert (len(s.train), len(s.val), len(s.test)) == (12_000, 4_000, 4_000)


def test_split_ten_samples():
    s = split(_fake_manifest([10]), seed=0)
    assert (len(s.train), len(s.val), len(s.test)) == (6, 2, 2)


def test_split_is_deterministic(tmp_path):
    m = _fake_manifest([13, 9, 40])
    a, b = split(m, 3), split(m, 3)
    a.save(tmp_path / "a.json")
    b.save(tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert Split.load(tmp_path / "a.json") == a
    assert split(m, 4) != a


def test_split_rejects_tiny_class():
    with pytest.raises(DatasetError, match="c1"):
        split(_fake_manifest([10, 4]), 0)


@given(st.lists(st.integers(5, 60), min_size=1, max_size=6), st.integers(0, 2**32 - 1))
def test_split_partitions_and_stratifies(counts, seed):
    m = _fake_manifest(counts)
    s = split(m, seed)
    everything = s.train + s.val + s.test
    assert sorted(everything) == list(range(len(m)))
    labels = m.labels()
    for c, n in enumerate(counts):
        n_test = int(np.sum(labels[s.test] == c))
        n_val = int(np.sum(labels[s.val] == c))
        n_train = int(np.sum(labels[s.train] == c))
        assert abs(n_test - 0.2 * n) <= 1
        assert abs(n_val - 0.2 * n) <= 1
        assert abs(n_train - 0.6 * n) <= 1
        assert (n_train, n_val, n_test) == split_sizes(n)


def test_identity_augmentation_is_bit_exact():
    img = GrayImage(make_rng(0).integers(0, 256, (16, 16)))
    out = augment(img, AugmentConfig.disabled(), make_rng(1))
    assert np.array_equal(out.data, img.data)


def test_forced_horizontal_flip():
    img = GrayImage(np.array([[10, 20]]))
    assert apply_affine(img, AffineParams(hflip=True)).data.tolist() == [[20, 10]]


def test_forced_quarter_turn_matches_index_permutation():
    pattern = np.array([[1, 2, 3], [4, 5, 6], [7, 8, 9]], np.uint8)
    out = apply_affine(GrayImage(pattern), AffineParams(angle_deg=90.0)).data
    # counter-clockwise: out[i, j] = in[j, n - 1 - i]
    expected = np.array([[pattern[j, 2 - i] for j in range(3)] for i in range(3)])
    assert np.array_equal(out, expected)
    assert np.array_equal(out, np.rot90(pattern))


def test_shift_fills_with_background():
    img = GrayImage(np.full((5, 5), 100))
    out = apply_affine(img, AffineParams(shift_x=2.0)).data
    assert np.all(out[:, :2] == 0) and np.all(out[:, 2:] == 100)


@given(arrays(np.uint8, st.tuples(st.integers(1, 20), st.integers(1, 20))), st.integers(0, 1000))
def test_augment_keeps_dimensions(data, seed):
    out = augment(GrayImage(data), AugmentConfig(vflip=True), make_rng(seed))
    assert out.shape == data.shape


def test_augment_reproducible_per_rng_state():
    img = GrayImage(make_rng(5).integers(0, 256, (32, 32)))
    a = augment(img, AugmentConfig(), make_rng(11))
    b = augment(img, AugmentConfig(), make_rng(11))
    assert np.array_equal(a.data, b.data)
