"""Accuracy, column-normalised confusion matrices and k-part accuracy samples."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import DatasetManifest, load_images, make_rng
from .trainer import accuracy, evaluate


@dataclass(frozen=True)
class ConfusionMatrix:
    """``counts[p][a]``: samples of actual class ``a`` predicted as ``p``.

    ``percent`` normalises each column (actual class) to 100; columns with no
    samples stay zero and are listed in ``empty_columns``.
    """

    classes: list[str]
    counts: np.ndarray
    percent: np.ndarray
    empty_columns: list[int]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["predicted \\ actual"] + list(self.classes))
        for name, row in zip(self.classes, self.percent):
            writer.writerow([name] + [f"{v:.1f}" for v in row])
        return buf.getvalue()

    def save_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())


def confusion(preds, actuals, classes) -> ConfusionMatrix:
    preds = np.asarray(preds, dtype=np.int64)
    actuals = np.asarray(actuals, dtype=np.int64)
    if preds.shape != actuals.shape:
        raise ValueError(f"{len(preds)} predictions for {len(actuals)} labels")
    n = len(classes)
    if len(preds) and (preds.min() < 0 or actuals.min() < 0 or preds.max() >= n or actuals.max() >= n):
        raise ValueError("class index out of range")
    counts = np.zeros((n, n), dtype=np.int64)
    np.add.at(counts, (preds, actuals), 1)
    column_totals = counts.sum(axis=0)
    percent = np.zeros((n, n), dtype=np.float64)
    filled = column_totals > 0
    percent[:, filled] = 100.0 * counts[:, filled] / column_totals[filled]
    return ConfusionMatrix(list(classes), counts, percent, [int(i) for i in np.flatnonzero(~filled)])


def per_class_rate(cm: ConfusionMatrix) -> list[float]:
    """Recognition rate per actual class: the diagonal of the column-normalised matrix."""
    return [float(v) for v in np.diag(cm.percent)]


def kfold_parts(indices, k: int, seed: int) -> list[np.ndarray]:
    """Seeded shuffle of ``indices`` cut into ``k`` disjoint parts whose sizes differ by at most one."""
    indices = np.asarray(indices, dtype=np.int64)
    if k < 2:
        raise ValueError("k must be at least 2")
    if len(indices) < k:
        raise ValueError(f"cannot split {len(indices)} samples into {k} parts")
    return np.array_split(make_rng(seed).permutation(indices), k)


def kfold_accuracy_samples(model, manifest: DatasetManifest | None, test_indices, k: int = 10,
                           seed: int = 0, data=None) -> list[float]:
    """Accuracy (percent) of ``model`` on each of ``k`` disjoint parts of the test set."""
    parts = kfold_parts(test_indices, k, seed)
    if data is None:
        data = load_images(manifest)
    images, labels = data
    preds = np.argmax(model.predict_proba(images[np.concatenate(parts)]), axis=1)
    out, start = [], 0
    for part in parts:
        out.append(accuracy(preds[start:start + len(part)], labels[part]))
        start += len(part)
    return out


__all__ = [
    "ConfusionMatrix",
    "accuracy",
    "confusion",
    "evaluate",
    "kfold_accuracy_samples",
    "kfold_parts",
    "per_class_rate",
]
