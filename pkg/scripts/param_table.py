#!/usr/bin/env python3
"""Print layer tables and parameter totals of the reference architectures."""

import argparse

from gesture_ensemble.modelzoo import ARCHITECTURES, ENSEMBLE_MEMBERS, REPORTED_TOTALS, count_parameters, format_summary


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--layers", choices=sorted(ARCHITECTURES), help="also print the layer table of one model")
    a = p.parse_args()
    if a.layers:
        print(format_summary(ARCHITECTURES[a.layers](a.classes)))
        print()
    print(f"{'model':<16}{'parameters':>14}{'reported':>14}{'diff':>9}")
    total = 0
    for key in sorted(ARCHITECTURES):
        spec = ARCHITECTURES[key](a.classes)
        n = count_parameters(spec)
        if key in ENSEMBLE_MEMBERS:
            total += n
        reported = REPORTED_TOTALS.get(spec.name) if a.classes == 10 else None
        diff = f"{100 * (n - reported) / reported:+.2f}%" if reported else ""
        print(f"{spec.name:<16}{n:>14,}{reported or '':>14,}{diff:>9}" if reported else f"{spec.name:<16}{n:>14,}")
    reported = REPORTED_TOTALS["ensemble"] if a.classes == 10 else None
    line = f"{'ensemble':<16}{total:>14,}"
    if reported:
        line += f"{reported:>14,}{100 * (total - reported) / reported:>+8.2f}%"
    print(line)


if __name__ == "__main__":
    main()
