"""Live recognition loop over a frame source, with per-frame latency accounting."""

from __future__ import annotations

import csv
import json
import logging
import time
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator

import numpy as np

from .ensemble import predict_label
from .errors import GestureError
from .imgproc import (
    BackgroundModel,
    GrayImage,
    PreprocessConfig,
    preprocess,
    read_image,
    subtract_background,
    to_grayscale,
    update_background,
)
from .imgproc.io import is_image_file

log = logging.getLogger(__name__)

NO_HAND = "NO_HAND"


@dataclass(frozen=True)
class LiveConfig:
    preprocess: PreprocessConfig = PreprocessConfig()
    learning_rate: float = 0.05
    diff_threshold: float = 25.0
    # background stays frozen after a detection until this many empty frames in a row
    resume_after: int = 30
    keep_inputs: bool = False


@dataclass(frozen=True)
class FrameResult:
    frame_index: int
    label: str
    confidence: float
    latency_ms: float
    timestamp_ms: float = 0.0
    diagnostic: str | None = None
    model_input: np.ndarray | None = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class LatencyReport:
    per_class_avg_ms: dict[str, float]
    per_class_count: dict[str, int]
    overall_avg_ms: float
    frames: int
    window_s: float
    fps: float

    def to_json(self) -> dict:
        rows = [
            {"gesture": k, "frames": self.per_class_count[k], "avg_ms": v}
            for k, v in self.per_class_avg_ms.items()
        ]
        return {
            "rows": rows,
            "overall_avg_ms": self.overall_avg_ms,
            "frames": self.frames,
            "window_s": self.window_s,
            "fps": self.fps,
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")


# --- sources -----------------------------------------------------------------

class RecordedFrames:
    """Frames from a directory of images (name order) or an in-memory sequence."""

    def __init__(self, frames: str | Path | Iterable[np.ndarray]):
        if isinstance(frames, (str, Path)):
            root = Path(frames)
            if not root.is_dir():
                raise FileNotFoundError(f"no frame directory at {root}")
            self._paths = sorted(p for p in root.iterdir() if is_image_file(p))
            self._frames = None
        else:
            self._paths = None
            self._frames = list(frames)

    def __iter__(self) -> Iterator[np.ndarray]:
        if self._frames is not None:
            yield from self._frames
        else:
            for p in self._paths:
                yield read_image(p)


class CameraSource:
    """OpenCV capture device; frames are converted from BGR to RGB."""

    def __init__(self, index: int = 0, max_frames: int | None = None):
        self.index = index
        self.max_frames = max_frames

    def __iter__(self) -> Iterator[np.ndarray]:
        import cv2

        cap = cv2.VideoCapture(self.index)
        if not cap.isOpened():
            raise FileNotFoundError(f"cannot open camera {self.index}")
        try:
            n = 0
            while self.max_frames is None or n < self.max_frames:
                ok, frame = cap.read()
                if not ok:
                    return
                n += 1
                yield frame[..., ::-1].copy()
        finally:
            cap.release()


def open_source(spec: str | int | Path) -> RecordedFrames | CameraSource:
    """An integer (or digit string) selects a camera, anything else a frame directory."""
    if isinstance(spec, int) or (isinstance(spec, str) and spec.isdigit()):
        return CameraSource(int(spec))
    return RecordedFrames(spec)


# --- pipeline ----------------------------------------------------------------

def _class_name(e, idx: int) -> str:
    classes = getattr(e, "classes", None)
    return classes[idx] if classes else str(idx)


def run_live(
    source: Iterable[np.ndarray],
    e,
    cfg: LiveConfig = LiveConfig(),
    clock: Callable[[], float] = time.perf_counter,
) -> Iterator[FrameResult]:
    """Yield one FrameResult per source frame, in source order.

    Latency runs from the moment a frame leaves the source to the moment its
    label is known.
    """
    bg = BackgroundModel(learning_rate=cfg.learning_rate, diff_threshold=cfg.diff_threshold)
    frozen = False
    empty_streak = 0
    start = None
    it = iter(source)
    index = 0
    while True:
        try:
            frame = next(it)
        except StopIteration:
            return
        captured = clock()
        if start is None:
            start = captured
        label, conf, diag, model_input = NO_HAND, 0.0, None, None
        try:
            gray = to_grayscale(np.asarray(frame))
            if not bg.initialized:
                bg = update_background(bg, gray)
                diag = "background initialised"
            else:
                motion = subtract_background(bg, gray)
                masked = GrayImage(gray.data * motion.data)
                try:
                    model_input = preprocess(masked, cfg.preprocess).image.data
                except GestureError as exc:
                    diag = str(exc)
                if model_input is not None:
                    idx, conf = predict_label(e, model_input)
                    label = _class_name(e, idx)
                    frozen, empty_streak = True, 0
                else:
                    if frozen:
                        empty_streak += 1
                        if empty_streak >= cfg.resume_after:
                            frozen, empty_streak = False, 0
                    if not frozen:
                        bg = update_background(bg, gray)
        except (GestureError, ValueError) as exc:
            label, conf, diag = NO_HAND, 0.0, f"{type(exc).__name__}: {exc}"
            log.warning("frame %d: %s", index, diag)
        done = clock()
        yield FrameResult(
            frame_index=index,
            label=label,
            confidence=float(conf),
            latency_ms=(done - captured) * 1000.0,
            timestamp_ms=(captured - start) * 1000.0,
            diagnostic=diag,
            model_input=model_input if cfg.keep_inputs else None,
        )
        index += 1


def summarize_latency(results: list[FrameResult], window_s: float) -> LatencyReport:
    """Group latencies by label; fps is frames over the elapsed window."""
    if not results:
        raise ValueError("no frames to summarise")
    if window_s <= 0:
        raise ValueError(f"window must be positive, got {window_s}")
    groups: dict[str, list[float]] = defaultdict(list)
    for r in results:
        groups[r.label].append(r.latency_ms)
    per_class = {k: float(np.mean(v)) for k, v in sorted(groups.items())}
    counts = {k: len(v) for k, v in sorted(groups.items())}
    overall = float(np.mean([r.latency_ms for r in results]))
    return LatencyReport(per_class, counts, overall, len(results), float(window_s), len(results) / window_s)


def run_session(
    source: Iterable[np.ndarray],
    e,
    cfg: LiveConfig = LiveConfig(),
    sink: Callable[[np.ndarray | None, FrameResult], None] | None = None,
    clock: Callable[[], float] = time.perf_counter,
) -> tuple[list[FrameResult], LatencyReport | None]:
    """Drain ``run_live``; an interrupt stops the loop but still returns the report."""
    results: list[FrameResult] = []
    t0 = clock()
    try:
        for r in run_live(source, e, cfg, clock):
            results.append(r)
            if sink is not None:
                sink(r.model_input, r)
    except KeyboardInterrupt:
        log.info("interrupted after %d frames", len(results))
    window = clock() - t0
    if not results:
        return results, None
    return results, summarize_latency(results, max(window, 1e-9))


def write_session_csv(path: str | Path, results: list[FrameResult]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["frame_index", "timestamp_ms", "label", "confidence", "latency_ms"])
        for r in results:
            w.writerow([r.frame_index, f"{r.timestamp_ms:.3f}", r.label, f"{r.confidence:.6f}", f"{r.latency_ms:.3f}"])


def opencv_display(window: str = "gestures") -> Callable[[np.ndarray | None, FrameResult], None]:
    """Display sink showing the model input with its label in the title bar."""
    import cv2

    def show(image, result):
        if image is not None:
            cv2.imshow(window, image)
        cv2.setWindowTitle(window, f"{result.label} {result.confidence:.2f}")
        cv2.waitKey(1)

    return show
