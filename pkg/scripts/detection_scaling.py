#!/usr/bin/env python3
"""Optimized detection time versus target distance and NV coherence time.

Runs the scan-distance and scan-t2 commands at the default optimizer grids
and prints the resulting trends. Full default grids take a few seconds per
scan point; pass --quick for a coarse preview.
"""

import argparse
import csv
import sys
from pathlib import Path

from nvnmr import cli
from nvnmr.config import parse_config

QUICK_OVERRIDES = {"detect": {"b_points": 5, "t_points": 8}}


def print_scan(path: Path, x_label: str):
    with open(path, newline="") as handle:
        rows = list(csv.DictReader(handle))
    for row in rows:
        if row["error"]:
            print(f"  {x_label} = {row[next(iter(row))]:>8}: {row['error']}")
            continue
        print(f"  {x_label} = {float(list(row.values())[0]):8.3f}: "
              f"T = {float(row['best_time_s']):10.4f} s  "
              f"(B = {float(row['best_b_nmr_t']) * 1e6:7.2f} uT, "
              f"t_p = {float(row['best_t_p_s']) * 1e3:.3f} ms)")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/scaling")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--quick", action="store_true", help="coarse grids for a fast preview")
    args = parser.parse_args()

    raw = dict(QUICK_OVERRIDES) if args.quick else {}
    cfg = parse_config(raw)

    for command, label in (("scan-distance", "r [nm]"), ("scan-t2", "T2NV [ms]")):
        code = cli.dispatch(command, cfg, args.out, workers=args.workers)
        if code != 0:
            return code
        digest = cli.config_digest(command, cfg)
        print(f"{command}:")
        print_scan(Path(args.out) / f"{command}_{digest}.csv", label)
    return 0


if __name__ == "__main__":
    sys.exit(main())
