#!/usr/bin/env python3
"""End-to-end desk-scale run through the CLI on synthetic data.

ingest -> preprocess -> train (three members) -> eval -> ttest -> live replay
of a recorded moving-blob clip. Takes about six minutes on one CPU core.
"""

import argparse
import sys
from pathlib import Path

from gesture_ensemble.cli import main as cli
from gesture_ensemble.imgproc import GrayImage, write_image
from gesture_ensemble.synthetic import make_shapes_dataset, moving_blob_clip


def step(argv, may_fail=False):
    print("$ gesture-ensemble " + " ".join(argv), flush=True)
    code = cli(argv)
    if code and not may_fail:
        sys.exit(code)
    return code


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--work", default="runs/smoke")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--members", nargs="+", default=["alexnet", "vgg", "googlenet"])
    a = p.parse_args()
    work = Path(a.work)
    raw = make_shapes_dataset(work / "raw", per_class=100, seed=a.seed)
    step(["ingest", "--data", str(raw), "--out", str(work / "ingest")])
    step(["preprocess", "--data", str(work / "ingest" / "manifest.json"), "--out", str(work / "processed")])
    data = str(work / "processed" / "manifest.json")
    run = str(work / "run")
    step(["train", "--data", data, "--out", run, "--epochs", str(a.epochs), "--batch-size", str(a.batch_size),
          "--seed", str(a.seed), "--members", *a.members])
    step(["eval", "--data", data, "--out", run])
    if step(["ttest", "--data", data, "--out", run, "--k", "6", "--mu", "90"], may_fail=True):
        # identical accuracy on every part (typically 100%) leaves the t statistic undefined
        print("t-test skipped: no spread across test parts")
    frames = work / "clip"
    frames.mkdir(parents=True, exist_ok=True)
    for i, f in enumerate(moving_blob_clip(n_frames=30)):
        write_image(frames / f"{i:04d}.png", GrayImage(f[..., 0]))
    step(["live", "--source", str(frames), "--out", str(work / "live"), "--model", str(Path(run) / "ensemble.json"),
          "--no-display"])


if __name__ == "__main__":
    main()
