"""Training, evaluation and persistence of single ensemble members."""

from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import torch

from .dataset import AugmentConfig, DatasetManifest, Split, augment, load_images
from .errors import ArtifactError, DivergenceError, GestureError, ShapeError
from .imgproc.core import GrayImage
from .modelzoo.layers import ModelSpec
from .modelzoo.shapes import count_parameters
from .network import SpecNet, build_network, cross_entropy, softmax, to_batch

log = logging.getLogger(__name__)

EVAL_BATCH = 256


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size: int = 160
    learning_rate: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 0
    num_threads: int | None = 1

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("beta1 and beta2 must lie in [0, 1)")


@dataclass
class AdamState:
    m: object = 0.0
    v: object = 0.0
    t: int = 0


def adam_update(param, grad, state: AdamState, cfg: TrainConfig):
    """One Adam step. Works on numpy arrays, torch tensors or floats.

    Returns the new parameter value and the new state; inputs are not modified.
    """
    t = state.t + 1
    m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad
    v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad * grad
    m_hat = m / (1.0 - cfg.beta1 ** t)
    v_hat = v / (1.0 - cfg.beta2 ** t)
    new_param = param - cfg.learning_rate * m_hat / (v_hat ** 0.5 + cfg.epsilon)
    return new_param, AdamState(m=m, v=v, t=t)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    train_acc: float
    val_loss: float
    val_acc: float


@dataclass
class TrainedModel:
    spec: ModelSpec
    weights: dict[str, np.ndarray]
    history: list[EpochRecord] = field(default_factory=list)
    best_val_accuracy: float = float("nan")
    seed: int | None = None
    _net: SpecNet | None = field(default=None, init=False, repr=False, compare=False)

    @property
    def name(self) -> str:
        return self.spec.name

    @property
    def num_classes(self) -> int:
        return self.spec.num_classes

    @property
    def input_shape(self) -> tuple[int, int, int]:
        return self.spec.input_shape

    def parameter_count(self) -> int:
        return count_parameters(self.spec)

    def weights_hash(self) -> str:
        h = hashlib.sha256()
        for key in sorted(self.weights):
            h.update(key.encode())
            h.update(np.ascontiguousarray(self.weights[key], dtype="<f4").tobytes())
        return h.hexdigest()

    def network(self) -> SpecNet:
        if self._net is None:
            net = build_network(self.spec)
            load_state(net, self.weights)
            net.eval()
            self._net = net
        return self._net

    def predict_proba(self, images: np.ndarray) -> np.ndarray:
        """Softmax scores, shape (N, num_classes), for uint8 images of shape (N, h, w)."""
        images = np.asarray(images)
        if images.ndim == 2:
            images = images[None]
        h, w, _ = self.input_shape
        if images.shape[1:] != (h, w):
            raise ShapeError(f"{self.name} expects {h}x{w} inputs, got {images.shape[1:]}")
        net = self.network()
        out = []
        with torch.no_grad():
            for start in range(0, len(images), EVAL_BATCH):
                batch = to_batch(images[start:start + EVAL_BATCH])
                out.append(softmax(net(batch)).double().numpy())
        return np.concatenate(out) if out else np.zeros((0, self.num_classes))

    # persistence: spec.json + weights.npz (little-endian float32) + history.csv + meta.json

    def save(self, directory: str | Path) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "spec.json").write_text(json.dumps(self.spec.to_json(), indent=1) + "\n")
        with open(directory / "weights.npz", "wb") as fh:
            np.savez(fh, **{k: np.asarray(v, dtype="<f4") for k, v in sorted(self.weights.items())})
        (directory / "history.csv").write_text(history_csv(self.history))
        meta = {
            "name": self.name,
            "spec_hash": self.spec.content_hash(),
            "weights_hash": self.weights_hash(),
            "best_val_accuracy": self.best_val_accuracy,
            "seed": self.seed,
            "parameters": self.parameter_count(),
        }
        (directory / "meta.json").write_text(json.dumps(meta, indent=1) + "\n")
        return directory

    @classmethod
    def load(cls, directory: str | Path) -> TrainedModel:
        directory = Path(directory)
        for part in ("spec.json", "weights.npz", "meta.json"):
            if not (directory / part).is_file():
                raise ArtifactError(f"missing {directory / part}")
        spec = ModelSpec.from_json(json.loads((directory / "spec.json").read_text()))
        meta = json.loads((directory / "meta.json").read_text())
        if meta["spec_hash"] != spec.content_hash():
            raise ArtifactError(f"{directory}: spec hash does not match the saved weights")
        with np.load(directory / "weights.npz") as npz:
            weights = {k: npz[k].astype(np.float32) for k in npz.files}
        history = []
        if (directory / "history.csv").is_file():
            history = read_history_csv((directory / "history.csv").read_text())
        model = cls(spec, weights, history, meta.get("best_val_accuracy", float("nan")), meta.get("seed"))
        if model.weights_hash() != meta["weights_hash"]:
            raise ArtifactError(f"{directory}: weights do not match their recorded hash")
        return model


def state_weights(net: SpecNet) -> dict[str, np.ndarray]:
    """Float tensors keyed by layer path (BN batch counters are not persisted)."""
    return {
        k: v.detach().cpu().numpy().astype(np.float32).copy()
        for k, v in net.state_dict().items()
        if v.dtype.is_floating_point
    }


def load_state(net: SpecNet, weights: dict[str, np.ndarray]) -> None:
    expected = {k for k, v in net.state_dict().items() if v.dtype.is_floating_point}
    if set(weights) != expected:
        missing, extra = expected - set(weights), set(weights) - expected
        raise ArtifactError(f"weights do not fit spec: missing {sorted(missing)[:3]}, extra {sorted(extra)[:3]}")
    state = {k: torch.from_numpy(np.asarray(v)) for k, v in weights.items()}
    net.load_state_dict(state, strict=False)


HISTORY_FIELDS = ("epoch", "train_loss", "train_acc", "val_loss", "val_acc")


def history_csv(history: list[EpochRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HISTORY_FIELDS)
    for r in history:
        writer.writerow([r.epoch] + [repr(float(getattr(r, f))) for f in HISTORY_FIELDS[1:]])
    return buf.getvalue()


def read_history_csv(text: str) -> list[EpochRecord]:
    rows = csv.DictReader(io.StringIO(text))
    return [EpochRecord(int(r["epoch"]), *(float(r[f]) for f in HISTORY_FIELDS[1:])) for r in rows]


def _seed_streams(seed: int):
    init, shuffle, aug, drop = np.random.SeedSequence(seed).spawn(4)
    gen = torch.Generator()
    gen.manual_seed(int(drop.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1)))
    return (np.random.Generator(np.random.PCG64(init)), np.random.Generator(np.random.PCG64(shuffle)),
            np.random.Generator(np.random.PCG64(aug)), gen)


def _augmented_batch(images, indices, aug_cfg, rng):
    if aug_cfg is None:
        return images[indices]
    return np.stack([augment(GrayImage(images[i]), aug_cfg, rng).data for i in indices])


def score_images(net: SpecNet, images: np.ndarray, labels: np.ndarray | None = None):
    """Probabilities for ``images`` in eval mode, plus mean loss when labels are given."""
    net.eval()
    probs, loss_sum = [], 0.0
    with torch.no_grad():
        for start in range(0, len(images), EVAL_BATCH):
            batch = to_batch(images[start:start + EVAL_BATCH])
            logits = net(batch)
            probs.append(softmax(logits).double().numpy())
            if labels is not None:
                y = torch.from_numpy(np.asarray(labels[start:start + EVAL_BATCH], dtype=np.int64))
                loss_sum += float(cross_entropy(logits, y)) * len(batch)
    probs = np.concatenate(probs)
    loss = loss_sum / len(images) if labels is not None else float("nan")
    return probs, loss


def _check_input(spec: ModelSpec, images: np.ndarray):
    h, w, c = spec.input_shape
    if c != 1 or images.shape[1:] != (h, w):
        raise ShapeError(f"{spec.name} expects {h}x{w}x{c} inputs, dataset images are {images.shape[1:]}")


def train(
    spec: ModelSpec,
    manifest: DatasetManifest | None,
    split: Split,
    train_cfg: TrainConfig = TrainConfig(),
    augment_cfg: AugmentConfig | None = AugmentConfig(),
    data: tuple[np.ndarray, np.ndarray] | None = None,
) -> TrainedModel:
    """Fit ``spec`` on ``split.train`` with Adam on categorical cross-entropy.

    Metrics are recorded per epoch; the weights of the epoch with the best
    validation accuracy are returned. ``data`` short-circuits image loading.
    """
    if train_cfg.num_threads:
        torch.set_num_threads(train_cfg.num_threads)
    images, labels = data if data is not None else load_images(manifest)
    _check_input(spec, images)
    if not split.train or not split.val:
        raise ValueError("split needs non-empty train and val parts")
    init_rng, shuffle_rng, aug_rng, drop_gen = _seed_streams(train_cfg.seed)

    net = build_network(spec, init_rng)
    net.set_dropout_generator(drop_gen)
    params = [p for p in net.parameters() if p.requires_grad]
    states = [AdamState() for _ in params]

    train_idx = np.asarray(split.train)
    val_idx = np.asarray(split.val)
    history: list[EpochRecord] = []
    best_acc, best_state = -1.0, None

    for epoch in range(1, train_cfg.epochs + 1):
        net.train()
        order = shuffle_rng.permutation(train_idx)
        loss_sum, correct = 0.0, 0
        for b, start in enumerate(range(0, len(order), train_cfg.batch_size)):
            idx = order[start:start + train_cfg.batch_size]
            x = to_batch(_augmented_batch(images, idx, augment_cfg, aug_rng))
            y = torch.from_numpy(labels[idx].astype(np.int64))
            for p in params:
                p.grad = None
            logits = net(x)
            loss = cross_entropy(logits, y)
            if not torch.isfinite(loss):
                raise DivergenceError(f"{spec.name}: non-finite loss at epoch {epoch}, batch {b}: {float(loss.detach())}")
            loss.backward()
            with torch.no_grad():
                for i, p in enumerate(params):
                    new, states[i] = adam_update(p.detach(), p.grad, states[i], train_cfg)
                    p.copy_(new)
            loss_sum += float(loss.detach()) * len(idx)
            correct += int((logits.argmax(dim=1) == y).sum())

        val_probs, val_loss = score_images(net, images[val_idx], labels[val_idx])
        val_acc = accuracy(np.argmax(val_probs, axis=1), labels[val_idx])
        record = EpochRecord(epoch, loss_sum / len(order), 100.0 * correct / len(order), val_loss, val_acc)
        history.append(record)
        log.info("%s epoch %d: loss %.4f acc %.2f val_loss %.4f val_acc %.2f",
                 spec.name, epoch, record.train_loss, record.train_acc, val_loss, val_acc)
        if val_acc > best_acc:
            best_acc, best_state = val_acc, copy.deepcopy(state_weights(net))

    return TrainedModel(spec, best_state, history, best_acc, train_cfg.seed)


def accuracy(predictions, actuals) -> float:
    """Percentage of correct predictions."""
    predictions, actuals = np.asarray(predictions), np.asarray(actuals)
    if len(actuals) == 0:
        raise ValueError("accuracy of an empty set is undefined")
    return 100.0 * float(np.sum(predictions == actuals)) / len(actuals)


def evaluate(model, manifest: DatasetManifest | None, indices,
             data: tuple[np.ndarray, np.ndarray] | None = None) -> tuple[float, np.ndarray]:
    """(accuracy in percent, predicted labels) over ``indices``; ties pick the lowest class.

    Works for anything with ``predict_proba``, including ensembles.
    """
    indices = np.asarray(indices, dtype=np.int64)
    if len(indices) == 0:
        raise ValueError("no samples to evaluate")
    images, labels = data if data is not None else load_images(manifest)
    preds = np.argmax(model.predict_proba(images[indices]), axis=1)
    return accuracy(preds, labels[indices]), preds


def member_seed(base_seed: int, index: int) -> int:
    return int(np.random.SeedSequence([base_seed, index]).generate_state(1)[0])


class MemberTrainingError(GestureError):
    def __init__(self, results, failures):
        self.results = results
        self.failures = failures
        detail = "; ".join(f"member {i}: {exc!r}" for i, exc in failures.items())
        super().__init__(f"{len(failures)} member(s) failed: {detail}")


def train_members(
    specs: list[ModelSpec],
    manifest: DatasetManifest | None,
    split: Split,
    train_cfg: TrainConfig = TrainConfig(),
    augment_cfg: AugmentConfig | None = AugmentConfig(),
    data: tuple[np.ndarray, np.ndarray] | None = None,
    workers: int = 1,
) -> list[TrainedModel]:
    """Train each spec independently with a seed derived from its position.

    If any member fails the others still finish; a ``MemberTrainingError``
    then carries both the finished models and the per-member exceptions.
    """
    if not specs:
        raise ValueError("need at least one spec")
    if data is None:
        data = load_images(manifest)
    configs = [
        TrainConfig(**{**asdict(train_cfg), "seed": member_seed(train_cfg.seed, i)})
        for i in range(len(specs))
    ]

    def run(i):
        return train(specs[i], None, split, configs[i], augment_cfg, data=data)

    results: list[TrainedModel | None] = [None] * len(specs)
    failures: dict[int, BaseException] = {}
    if workers <= 1:
        for i in range(len(specs)):
            try:
                results[i] = run(i)
            except Exception as exc:  # noqa: BLE001 - reported per member
                failures[i] = exc
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {i: pool.submit(run, i) for i in range(len(specs))}
            for i, fut in futures.items():
                try:
                    results[i] = fut.result()
                except Exception as exc:  # noqa: BLE001
                    failures[i] = exc
    if failures:
        raise MemberTrainingError(results, failures)
    return results
