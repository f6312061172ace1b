"""``gesture-ensemble`` command line: ingest, preprocess, train, eval, ttest, live."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .dataset import AugmentConfig, DatasetManifest, Split, ingest, load_images, preprocess_dataset, split
from .ensemble import build_ensemble, load_ensemble, save_ensemble
from .errors import ArtifactError, DivergenceError, GestureError
from .imgproc import AUTO, PreprocessConfig
from .metrics import confusion, kfold_accuracy_samples, per_class_rate
from .modelzoo import ARCHITECTURES, ENSEMBLE_MEMBERS
from .stats import one_sample_ttest
from .trainer import MemberTrainingError, TrainConfig, TrainedModel, evaluate, train_members

log = logging.getLogger("gesture_ensemble")

EXIT_OK, EXIT_INPUT, EXIT_ARTIFACT, EXIT_DIVERGED = 0, 2, 3, 4


class InputError(GestureError):
    pass


@dataclass
class RunConfig:
    """Everything a run depends on. Hyper-parameter keys follow the usual
    hyper-parameter table terms (input size, epochs, batch size, ...)."""

    data: str | None = None
    out: str = "runs/default"
    seed: int = 0
    # training hyper-parameters
    input_size: list = field(default_factory=lambda: [64, 64])
    epochs: int = 30
    batch_size: int = 160
    learning_rate: float = 1e-4
    pooling: list = field(default_factory=lambda: [2, 2])
    dropout: float = 0.2
    optimizer: str = "adam"
    activation_function: str = "relu"
    error_function: str = "categorical_crossentropy"
    beta_1: float = 0.9
    beta_2: float = 0.999
    epsilon: float = 1e-8
    members: list = field(default_factory=lambda: list(ENSEMBLE_MEMBERS))
    workers: int = 1
    augmentation: dict = field(default_factory=lambda: asdict(AugmentConfig()))
    # preprocessing
    threshold: int | str = AUTO
    expand_ratio: float = 1.4
    median_window: int = 5
    # evaluation
    model: str | None = None
    k: int = 10
    mu: float = 99.0
    # live
    source: str | None = None
    display: bool = True

    def validate(self) -> None:
        fixed = {
            "input_size": [64, 64],
            "pooling": [2, 2],
            "dropout": 0.2,
            "optimizer": "adam",
            "activation_function": "relu",
            "error_function": "categorical_crossentropy",
        }
        for key, value in fixed.items():
            if getattr(self, key) != value:
                raise InputError(f"{key}={getattr(self, key)!r} is not supported; the architectures fix it at {value!r}")
        unknown = [m for m in self.members if m not in ARCHITECTURES]
        if unknown or not self.members:
            raise InputError(f"unknown members {unknown}; choose from {sorted(ARCHITECTURES)}")
        if self.threshold != AUTO and not (isinstance(self.threshold, int) and 0 <= self.threshold <= 255):
            raise InputError(f"threshold must be 'auto' or 0..255, got {self.threshold!r}")

    def train_config(self) -> TrainConfig:
        return TrainConfig(epochs=self.epochs, batch_size=self.batch_size, learning_rate=self.learning_rate,
                           beta1=self.beta_1, beta2=self.beta_2, epsilon=self.epsilon, seed=self.seed)

    def augment_config(self) -> AugmentConfig:
        return AugmentConfig(**self.augmentation)

    def preprocess_config(self) -> PreprocessConfig:
        return PreprocessConfig(threshold=self.threshold, median_k=self.median_window,
                                expand_ratio=self.expand_ratio, size=tuple(self.input_size))


FLAG_KEYS = ("data", "out", "seed", "epochs", "batch_size", "learning_rate", "members", "expand_ratio",
             "threshold", "k", "mu", "source", "model", "workers")


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the ``--config`` file, then explicit flags."""
    cfg = RunConfig()
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise InputError(f"config file {path} not found")
        doc = json.loads(path.read_text())
        names = {f.name for f in fields(RunConfig)}
        unknown = sorted(set(doc) - names)
        if unknown:
            raise InputError(f"unknown config keys {unknown}")
        cfg = replace(cfg, **doc)
    overrides = {k: getattr(args, k) for k in FLAG_KEYS if getattr(args, k, None) is not None}
    if getattr(args, "no_display", False):
        overrides["display"] = False
    cfg = replace(cfg, **overrides)
    if isinstance(cfg.threshold, str) and cfg.threshold.isdigit():
        cfg = replace(cfg, threshold=int(cfg.threshold))
    cfg.validate()
    return cfg


def echo_config(cfg: RunConfig, command: str) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"config.{command}.json"
    path.write_text(json.dumps(asdict(cfg), indent=1, sort_keys=True) + "\n")
    return path


def _manifest(cfg: RunConfig) -> DatasetManifest:
    if not cfg.data:
        raise InputError("--data is required")
    path = Path(cfg.data)
    if path.is_file():
        return DatasetManifest.load(path)
    if (path / "manifest.json").is_file():
        return DatasetManifest.load(path / "manifest.json")
    if path.is_dir():
        return ingest(path)
    raise InputError(f"no dataset at {path}")


def _processed(cfg: RunConfig) -> tuple[DatasetManifest, tuple[np.ndarray, np.ndarray]]:
    manifest = _manifest(cfg)
    if manifest.image_size is None:
        raise InputError(f"{cfg.data} is not a preprocessed manifest; run `preprocess` first")
    return manifest, load_images(manifest, tuple(cfg.input_size))


def _model(cfg: RunConfig):
    path = Path(cfg.model) if cfg.model else Path(cfg.out) / "ensemble.json"
    if path.is_dir():
        return TrainedModel.load(path)
    if not path.exists():
        raise ArtifactError(f"model artifact {path} not found")
    return load_ensemble(path)


def _split(cfg: RunConfig, manifest: DatasetManifest) -> Split:
    path = Path(cfg.out) / "split.json"
    if path.is_file():
        return Split.load(path)
    return split(manifest, cfg.seed)


# --- commands ------------------------------------------------------------------

def cmd_ingest(cfg: RunConfig) -> int:
    if not cfg.data or not Path(cfg.data).is_dir():
        raise InputError(f"dataset root {cfg.data!r} is not a directory")
    manifest = ingest(cfg.data)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest.save(out / "manifest.json")
    print(f"{len(manifest)} images in {len(manifest.classes)} classes -> {out / 'manifest.json'}")
    return EXIT_OK


def cmd_preprocess(cfg: RunConfig) -> int:
    manifest = _manifest(cfg)
    out = Path(cfg.out)
    processed, skipped = preprocess_dataset(manifest, out / "images", cfg.preprocess_config())
    processed.save(out / "manifest.json")
    (out / "skipped.json").write_text(json.dumps(skipped, indent=1) + "\n")
    print(f"processed {len(processed)} images, skipped {len(skipped)} -> {out / 'manifest.json'}")
    return EXIT_OK


def cmd_train(cfg: RunConfig) -> int:
    manifest, data = _processed(cfg)
    out = Path(cfg.out)
    parts = split(manifest, cfg.seed)
    parts.save(out / "split.json")
    specs = [ARCHITECTURES[m](len(manifest.classes)) for m in cfg.members]
    models = train_members(specs, None, parts, cfg.train_config(), cfg.augment_config(), data=data,
                           workers=cfg.workers)
    dirs = []
    for model in models:
        d = out / "models" / model.name
        model.save(d)
        dirs.append(d)
        print(f"{model.name}: best val accuracy {model.best_val_accuracy:.2f}% ({model.parameter_count():,} parameters)")
    save_ensemble(out / "ensemble.json", dirs, manifest.classes)
    return EXIT_OK


def cmd_eval(cfg: RunConfig) -> int:
    model = _model(cfg)
    manifest, data = _processed(cfg)
    parts = _split(cfg, manifest)
    out = Path(cfg.out)
    acc, preds = evaluate(model, None, parts.test, data=data)
    cm = confusion(preds, data[1][np.asarray(parts.test)], manifest.classes)
    cm.save_csv(out / "confusion.csv")
    rates = per_class_rate(cm)
    with open(out / "per_class.csv", "w") as fh:
        fh.write("class,rate\n")
        for c, r in zip(manifest.classes, rates):
            fh.write(f"{c},{r:.2f}\n")
    print(f"{model.name} test accuracy: {acc:.2f}% on {len(parts.test)} images")
    members = getattr(model, "members", [])
    for m in members:
        print(f"  {m.name}: {evaluate(m, None, parts.test, data=data)[0]:.2f}%")
    return EXIT_OK


def cmd_ttest(cfg: RunConfig) -> int:
    model = _model(cfg)
    manifest, data = _processed(cfg)
    parts = _split(cfg, manifest)
    samples = kfold_accuracy_samples(model, None, parts.test, k=cfg.k, seed=cfg.seed, data=data)
    out = Path(cfg.out)
    (out / "ttest_parts.csv").write_text("part,accuracy\n" + "".join(f"{i},{a:.4f}\n" for i, a in enumerate(samples)))
    report = one_sample_ttest(samples, cfg.mu)
    report.save(out / "ttest.json")
    print(f"n={report.n} mean={report.mean:.4f} sd={report.sd:.4f} t={report.t:.4f} df={report.df} "
          f"p(two-sided)={report.p_two_sided:.3g}")
    return EXIT_OK


def cmd_live(cfg: RunConfig) -> int:
    from .realtime import LiveConfig, open_source, opencv_display, run_session, write_session_csv

    if cfg.source is None:
        raise InputError("--source is required (camera index or frame directory)")
    model = _model(cfg)
    if not hasattr(model, "members"):
        model = build_ensemble([model])
    try:
        source = open_source(cfg.source)
    except FileNotFoundError as exc:
        raise InputError(str(exc)) from exc
    sink = opencv_display() if cfg.display else None
    live = LiveConfig(preprocess=cfg.preprocess_config(), keep_inputs=cfg.display)
    results, report = run_session(source, model, live, sink=sink)
    out = Path(cfg.out)
    write_session_csv(out / "session.csv", results)
    if report is None:
        print("source produced no frames")
        return EXIT_OK
    report.save(out / "latency.json")
    print(f"{report.frames} frames, {report.fps:.1f} fps, mean latency {report.overall_avg_ms:.2f} ms")
    return EXIT_OK


COMMANDS = {
    "ingest": cmd_ingest,
    "preprocess": cmd_preprocess,
    "train": cmd_train,
    "eval": cmd_eval,
    "ttest": cmd_ttest,
    "live": cmd_live,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config; flags override its values")
    common.add_argument("--data", help="dataset root or manifest JSON")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--model", help="ensemble JSON or member directory (default OUT/ensemble.json)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="gesture-ensemble", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("ingest", parents=[common], help="scan a class-per-directory image tree")
    pre = sub.add_parser("preprocess", parents=[common], help="segment and crop hands to 64x64")
    pre.add_argument("--expand-ratio", type=float, dest="expand_ratio")
    pre.add_argument("--threshold", help="'auto' (Otsu) or a fixed 0..255 level")
    tr = sub.add_parser("train", parents=[common], help="train ensemble members")
    tr.add_argument("--epochs", type=int)
    tr.add_argument("--batch-size", type=int, dest="batch_size")
    tr.add_argument("--lr", type=float, dest="learning_rate")
    tr.add_argument("--members", nargs="+", choices=sorted(ARCHITECTURES))
    tr.add_argument("--workers", type=int)
    sub.add_parser("eval", parents=[common], help="accuracy and confusion matrix on the test split")
    tt = sub.add_parser("ttest", parents=[common], help="one-sample t-test over k test parts")
    tt.add_argument("--k", type=int)
    tt.add_argument("--mu", type=float)
    lv = sub.add_parser("live", parents=[common], help="classify frames from a camera or directory")
    lv.add_argument("--source", help="camera index or directory of frames")
    lv.add_argument("--no-display", action="store_true", dest="no_display")
    lv.add_argument("--expand-ratio", type=float, dest="expand_ratio")
    lv.add_argument("--threshold")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        echo_config(cfg, args.command)
        return COMMANDS[args.command](cfg)
    except ArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARTIFACT
    except DivergenceError as exc:
        print(f"error: training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except MemberTrainingError as exc:
        for i, err in exc.failures.items():
            print(f"error: member {i} failed: {err}", file=sys.stderr)
        diverged = all(isinstance(e, DivergenceError) for e in exc.failures.values())
        return EXIT_DIVERGED if diverged else EXIT_INPUT
    except (GestureError, ValueError, FileNotFoundError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
