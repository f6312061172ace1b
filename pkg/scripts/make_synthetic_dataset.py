#!/usr/bin/env python3
"""Write the synthetic three-shape dataset (class-per-directory PNGs)."""

import argparse

from gesture_ensemble.synthetic import make_shapes_dataset


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("out", help="output root")
    p.add_argument("--per-class", type=int, default=100)
    p.add_argument("--size", type=int, default=96)
    p.add_argument("--seed", type=int, default=0)
    a = p.parse_args()
    root = make_shapes_dataset(a.out, per_class=a.per_class, size=a.size, seed=a.seed)
    print(f"wrote {3 * a.per_class} images under {root}")


if __name__ == "__main__":
    main()
