"""Drive-frequency sweeps and peak extraction.

A spectrum is the detection observable delta_s = s_off - s_on on an
ascending omega grid. The drive-off signal does not depend on omega, so it
is computed once and reused across the sweep. Grid points are independent;
the optional process pool maps them in submission order so the output is
identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import PulseSequence, matched_drive, run_sequence
from .hamiltonian import DriveSpec, HamiltonianModel
from .quantum import EvolutionOptions
from .system import SystemSpec, require_valid

DEFAULT_GRID_POINTS = 301
DEFAULT_HALF_SPAN = 2 * math.pi * 60e3  # rad/s around the nuclear Larmor


@dataclass(frozen=True)
class SweepPlan:
    """Frequency grid plus the fixed sequence/model/drive-amplitude choices.

    ``b_nmr = None`` selects the matched-drive amplitude for the sequence.
    """

    omega_grid: tuple[float, ...]
    seq: PulseSequence
    model: HamiltonianModel
    b_nmr: float | None = None
    phase: float = 0.0

    def __post_init__(self):
        grid = tuple(float(w) for w in self.omega_grid)
        object.__setattr__(self, "omega_grid", grid)
        if not grid:
            raise ValueError("omega grid must be nonempty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("omega grid must be strictly ascending")
        if self.b_nmr is not None and not (self.b_nmr >= 0):
            raise ValueError(f"b_nmr must be >= 0, got {self.b_nmr}")


@dataclass(frozen=True)
class SpectrumPoint:
    omega: float     # rad/s
    s_on: float
    delta_s: float   # s_off - s_on, exact


@dataclass(frozen=True)
class Spectrum:
    points: tuple[SpectrumPoint, ...]
    s_off: float
    plan: SweepPlan

    @property
    def omegas(self) -> np.ndarray:
        return np.array([p.omega for p in self.points])

    @property
    def delta_s(self) -> np.ndarray:
        return np.array([p.delta_s for p in self.points])


@dataclass(frozen=True)
class Peak:
    omega: float        # rad/s
    height: float       # delta_s units
    half_width: float   # rad/s, full width at half height


def default_omega_grid(
    spec: SystemSpec,
    points: int = DEFAULT_GRID_POINTS,
    half_span: float = DEFAULT_HALF_SPAN,
) -> tuple[float, ...]:
    """Symmetric grid around the target Larmor frequency."""
    if points < 2:
        raise ValueError("grid needs at least 2 points")
    center = reference_gamma(spec) * spec.b0
    return tuple(np.linspace(center - half_span, center + half_span, points))


def reference_gamma(spec: SystemSpec) -> float:
    """Gyromagnetic ratio used for matched drives and grid centering."""
    active = spec.active_nuclei
    return active[0].gamma if active else spec.constants.gamma_proton


def resolve_b_nmr(spec: SystemSpec, plan: SweepPlan) -> float:
    if plan.b_nmr is not None:
        return plan.b_nmr
    return matched_drive(plan.seq, reference_gamma(spec))


def _sweep_point(args) -> float:
    spec, model, seq, b, phase, omega, opts = args
    drive = DriveSpec(b_nmr=b, omega=omega, phase=phase)
    return run_sequence(spec, model, drive, seq, opts).s


def run_sweep(
    spec: SystemSpec,
    plan: SweepPlan,
    opts: EvolutionOptions = EvolutionOptions(),
    workers: int = 1,
) -> Spectrum:
    """Sweep the drive frequency over the plan grid at fixed t_p."""
    require_valid(spec)
    s_off = run_sequence(spec, plan.model, None, plan.seq, opts).s
    b = resolve_b_nmr(spec, plan)
    jobs = [(spec, plan.model, plan.seq, b, plan.phase, w, opts) for w in plan.omega_grid]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            s_on = list(pool.map(_sweep_point, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        s_on = [_sweep_point(j) for j in jobs]
    points = tuple(
        SpectrumPoint(omega=w, s_on=s, delta_s=s_off - s)
        for w, s in zip(plan.omega_grid, s_on)
    )
    return Spectrum(points=points, s_off=s_off, plan=plan)


def _cross(omega_a: float, omega_b: float, d_a: float, d_b: float, level: float) -> float:
    """Linear interpolation of the level crossing between two grid points."""
    if d_b == d_a:
        return omega_a
    return omega_a + (omega_b - omega_a) * (level - d_a) / (d_b - d_a)


def find_peaks(spectrum: Spectrum, min_height: float) -> list[Peak]:
    """Strict local maxima of delta_s above ``min_height``, ascending omega.

    Plateau maxima are reported once, at their lower-omega edge. The width
    is measured at half the peak height by linear interpolation, clamped to
    the grid span when a flank never descends that far.
    """
    if not (min_height > 0):
        raise ValueError("min_height must be positive")
    w = spectrum.omegas
    d = spectrum.delta_s
    n = len(d)
    peaks: list[Peak] = []
    for i in range(n):
        h = d[i]
        if h <= min_height:
            continue
        if i > 0 and d[i - 1] == h:
            continue  # plateau continuation; reported at its first index
        j = i
        while j + 1 < n and d[j + 1] == h:
            j += 1
        left_ok = i > 0 and d[i - 1] < h
        right_ok = j + 1 < n and d[j + 1] < h
        if not (left_ok and right_ok):
            continue
        half = h / 2.0
        lo = w[0]
        for a in range(i - 1, -1, -1):
            if d[a] <= half:
                lo = _cross(w[a], w[a + 1], d[a], d[a + 1], half)
                break
        hi = w[-1]
        for b in range(j + 1, n):
            if d[b] <= half:
                hi = _cross(w[b - 1], w[b], d[b - 1], d[b], half)
                break
        peaks.append(Peak(omega=float(w[i]), height=float(h), half_width=float(hi - lo)))
    return peaks
