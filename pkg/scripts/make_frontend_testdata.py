#!/usr/bin/env python3
"""Regenerate the golden CSVs consumed by the figures package tests.

The figures component reads only these CSV files; regenerating them through
the CLI keeps the interchange schema honest on both sides. Grids are reduced
so the whole set builds in seconds. Also writes a deliberately corrupted
header variant used by the renderer's failure-path test.
"""

import argparse
import shutil
import sys
import tempfile
from pathlib import Path

from nvnmr import cli
from nvnmr.config import parse_config

JOBS = (
    ("envelope.csv", "baseline", {
        "detect": {"t_points": 12},
    }),
    ("spectrum.csv", "spectrum", {
        "spectrum": {"points": 61, "half_span": "10 kHz"},
    }),
    ("time_vs_distance.csv", "scan-distance", {
        "detect": {"b_points": 5, "t_points": 8},
        "scan": {"distances": ["3 nm", "4 nm", "5 nm", "6 nm", "500 nm"]},
    }),
    ("time_vs_t2.csv", "scan-t2", {
        "detect": {"b_points": 5, "t_points": 8},
    }),
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--dest", default=str(Path(__file__).resolve().parents[1] / "frontend" / "testdata"),
    )
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as workdir:
        for name, command, overrides in JOBS:
            cfg = parse_config(overrides)
            code = cli.dispatch(command, cfg, workdir, workers=args.workers)
            if code != 0:
                return code
            digest = cli.config_digest(command, cfg)
            produced = Path(workdir) / f"{command}_{digest}.csv"
            shutil.copyfile(produced, dest / name)
            print(f"wrote {dest / name}")

    spectrum = (dest / "spectrum.csv").read_text(encoding="utf-8").splitlines(keepends=True)
    spectrum[0] = spectrum[0].replace("omega_hz", "bogus_hz", 1)
    (dest / "corrupted_header.csv").write_text("".join(spectrum), encoding="utf-8")
    print(f"wrote {dest / 'corrupted_header.csv'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
