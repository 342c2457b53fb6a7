"""Command dispatch and artifact emission.

Each command writes one CSV data file plus a JSON sidecar holding the fully
resolved config, package version, and wall time. File names are derived from
the command and a hash of the resolved config, so reruns of the same config
overwrite their own outputs and never collide with different runs. CSV bytes
depend only on the config, never on worker count or wall time.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, apply_overrides, load_raw, parse_config
from .detection import (
    UndetectableError,
    default_b_grid,
    default_t_grid,
    optimize,
    scan_distance,
    scan_t2,
)
from .dynamics import PulseSequence, matched_drive, run_sequence
from .hamiltonian import DriveSpec
from .quantum import EvolutionError
from .spectroscopy import SweepPlan, find_peaks, reference_gamma, run_sweep

COMMANDS = ("spectrum", "baseline", "optimize", "scan-distance", "scan-t2", "peaks")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COMPUTE = 3
EXIT_IO = 4

TWO_PI = 2.0 * math.pi


def config_digest(command: str, cfg: RunConfig) -> str:
    canon = json.dumps(cfg.resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(f"{command}\n{canon}".encode("utf-8")).hexdigest()[:12]


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _omega_grid(cfg: RunConfig) -> tuple[float, ...]:
    center = cfg.drive_omega
    if center is None:
        center = reference_gamma(cfg.spec) * cfg.spec.b0
    span = cfg.spectrum_half_span
    return tuple(
        float(w) for w in np.linspace(center - span, center + span, cfg.spectrum_points)
    )


def _sweep(cfg: RunConfig, workers: int):
    plan = SweepPlan(
        omega_grid=_omega_grid(cfg),
        seq=cfg.sequence,
        model=cfg.model,
        b_nmr=cfg.drive_b_nmr,
        phase=cfg.drive_phase,
    )
    return run_sweep(cfg.spec, plan, cfg.evolution, workers=workers)


def _spectrum_table(cfg: RunConfig, workers: int):
    spectrum = _sweep(cfg, workers)
    header = ("omega_hz", "s_on", "s_off", "delta_s")
    rows = [
        (p.omega / TWO_PI, p.s_on, spectrum.s_off, p.delta_s) for p in spectrum.points
    ]
    return header, rows


def _peaks_table(cfg: RunConfig, workers: int):
    spectrum = _sweep(cfg, workers)
    header = ("omega_hz", "height", "half_width_hz")
    rows = [
        (p.omega / TWO_PI, p.height, p.half_width / TWO_PI)
        for p in find_peaks(spectrum, cfg.peak_min_height)
    ]
    return header, rows


def _baseline_table(cfg: RunConfig, workers: int):
    spec = cfg.spec
    gamma = reference_gamma(spec)
    omega = cfg.drive_omega if cfg.drive_omega is not None else gamma * spec.b0
    t_grid = default_t_grid(spec.nv.t2, cfg.detect_t_factors, cfg.detect_t_points)
    header = ("t_p_s", "s_off", "s_on")
    rows = []
    for t_p in t_grid:
        seq = PulseSequence(cfg.sequence.kind, t_p, cfg.sequence.n)
        b = cfg.drive_b_nmr if cfg.drive_b_nmr is not None else matched_drive(seq, gamma)
        s_off = run_sequence(spec, cfg.model, None, seq, cfg.evolution).s
        s_on = run_sequence(
            spec, cfg.model, DriveSpec(b, omega, cfg.drive_phase), seq, cfg.evolution
        ).s
        rows.append((t_p, s_off, s_on))
    return header, rows


def _optimize_table(cfg: RunConfig, workers: int):
    spec = cfg.spec
    omega = cfg.drive_omega if cfg.drive_omega is not None else reference_gamma(spec) * spec.b0
    result = optimize(
        spec, cfg.model, cfg.sequence.kind, omega,
        default_b_grid(cfg.detect_b_span, cfg.detect_b_points),
        default_t_grid(spec.nv.t2, cfg.detect_t_factors, cfg.detect_t_points),
        n=cfg.sequence.n, opts=cfg.evolution, workers=workers,
    )
    header = ("b_nmr_t", "t_p_s", "delta_s", "n_shots", "total_time_s", "tag")
    rows = [
        (p.b_nmr, p.t_p, p.delta_s, p.n_shots, p.total_time, p.tag)
        for p in result.surface
    ]
    extra = {
        "best_b_nmr_t": result.best_b_nmr,
        "best_t_p_s": result.best_t_p,
        "best_time_s": result.best_time,
    }
    return header, rows, extra


def _scan_rows(points, parameter_label: str, parameter_scale: float):
    header = (parameter_label, "best_time_s", "best_b_nmr_t", "best_t_p_s", "error")
    rows = []
    for point in points:
        if point.result is None:
            rows.append((point.parameter / parameter_scale, None, None, None, point.error))
        else:
            r = point.result
            rows.append(
                (point.parameter / parameter_scale, r.best_time, r.best_b_nmr, r.best_t_p, None)
            )
    return header, rows


def _scan_distance_table(cfg: RunConfig, workers: int):
    points = scan_distance(
        cfg.spec, cfg.model, cfg.scan_distances,
        seq_kind=cfg.sequence.kind, n=cfg.sequence.n,
        b_grid=default_b_grid(cfg.detect_b_span, cfg.detect_b_points),
        t_grid=default_t_grid(cfg.spec.nv.t2, cfg.detect_t_factors, cfg.detect_t_points),
        opts=cfg.evolution, workers=workers,
    )
    return _scan_rows(points, "distance_nm", 1e-9)


def _scan_t2_table(cfg: RunConfig, workers: int):
    points = scan_t2(
        cfg.spec, cfg.model, cfg.scan_t2_values,
        seq_kind=cfg.sequence.kind, n=cfg.sequence.n,
        b_grid=default_b_grid(cfg.detect_b_span, cfg.detect_b_points),
        t_factors=cfg.detect_t_factors, t_points=cfg.detect_t_points,
        opts=cfg.evolution, workers=workers,
    )
    return _scan_rows(points, "t2_nv_ms", 1e-3)


_TABLES = {
    "spectrum": _spectrum_table,
    "peaks": _peaks_table,
    "baseline": _baseline_table,
    "optimize": _optimize_table,
    "scan-distance": _scan_distance_table,
    "scan-t2": _scan_t2_table,
}


def dispatch(command: str, cfg: RunConfig, outdir, workers: int = 1) -> int:
    """Run one command; returns a process exit code and prints any error."""
    if command not in COMMANDS:
        print(f"error: unknown command {command!r}; expected one of {', '.join(COMMANDS)}",
              file=sys.stderr)
        return EXIT_CONFIG
    started = time.perf_counter()
    try:
        produced = _TABLES[command](cfg, workers)
    except (UndetectableError, EvolutionError, ValueError) as err:
        print(f"error: computation failed: {err}", file=sys.stderr)
        return EXIT_COMPUTE
    header, rows = produced[0], produced[1]
    extra = produced[2] if len(produced) > 2 else None
    wall = time.perf_counter() - started

    digest = config_digest(command, cfg)
    csv_name = f"{command}_{digest}.csv"
    sidecar_name = f"{command}_{digest}.json"
    sidecar = {
        "command": command,
        "version": __version__,
        "config": cfg.resolved,
        "csv": csv_name,
        "rows": len(rows),
        "wall_time_s": wall,
    }
    if extra is not None:
        sidecar["result"] = extra
    try:
        os.makedirs(outdir, exist_ok=True)
        csv_path = os.path.join(outdir, csv_name)
        with open(csv_path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(v) for v in row])
        sidecar_path = os.path.join(outdir, sidecar_name)
        with open(sidecar_path, "w", encoding="utf-8") as handle:
            json.dump(sidecar, handle, indent=2, sort_keys=True)
            handle.write("\n")
    except OSError as err:
        print(f"error: cannot write outputs: {err}", file=sys.stderr)
        return EXIT_IO
    print(csv_path)
    print(sidecar_path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nvnmr",
        description="Single-spin NMR simulation: spectra, envelopes, and detection-time scans.",
    )
    parser.add_argument("--command", required=True, choices=COMMANDS)
    parser.add_argument("--config", default=None, help="YAML config path (omit for defaults)")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                        help="parallel workers; never affects output bytes")
    parser.add_argument("--grid-override", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config entry, e.g. spectrum.points=41")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.config is None:
            raw, source = {}, "<defaults>"
        else:
            raw, source = load_raw(args.config), str(args.config)
        if args.grid_override:
            raw = apply_overrides(raw, args.grid_override, source)
        cfg = parse_config(raw, source)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as err:
        print(f"error: cannot read config: {err}", file=sys.stderr)
        return EXIT_IO
    return dispatch(args.command, cfg, args.out, workers=args.workers)


if __name__ == "__main__":
    sys.exit(main())
