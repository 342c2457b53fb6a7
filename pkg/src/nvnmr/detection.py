"""Shot-noise detection criterion and acquisition-time optimization.

A transition is resolvable once delta_s >= 1/(C sqrt(N)); the cheapest
compliant shot count N and the wall time T = N t_p follow. The optimizer is
an exhaustive grid scan over (B_NMR, t_p) followed by one golden-section
refinement pass in t_p at the best field value. Undetectable samples carry
an explicit marker instead of an infinite time so scans stay serializable.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import PulseSequence, run_sequence
from .hamiltonian import DriveSpec, HamiltonianModel
from .quantum import EvolutionOptions, EvolutionError
from .system import SpinSite, SystemSpec, require_valid

DELTA_S_FLOOR = 1e-9

DEFAULT_B_GRID_SPAN = (1e-6, 1e-3)   # tesla, log-spaced
DEFAULT_B_GRID_POINTS = 13
DEFAULT_T_GRID_FACTORS = (0.05, 3.0)  # multiples of T2NV, linear
DEFAULT_T_GRID_POINTS = 24

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
GOLDEN_ITERATIONS = 20


class UndetectableError(RuntimeError):
    """The detection criterion cannot be met (delta_s at or below the floor)."""


@dataclass(frozen=True)
class DetectionOutcome:
    """Shots and wall time needed to resolve one drive setting."""

    delta_s: float
    n_shots: int
    total_time: float
    t_p: float

    def __post_init__(self):
        if self.n_shots < 1:
            raise ValueError(f"n_shots must be >= 1, got {self.n_shots}")
        if self.total_time != self.n_shots * self.t_p:
            raise ValueError("total_time must equal n_shots * t_p exactly")


@dataclass(frozen=True)
class SurfacePoint:
    """One optimizer sample; ``total_time`` is None when undetectable."""

    b_nmr: float
    t_p: float
    delta_s: float
    n_shots: int | None
    total_time: float | None
    tag: str  # "grid" or "refine"


@dataclass(frozen=True)
class OptimizationResult:
    best_b_nmr: float
    best_t_p: float
    best_time: float
    surface: tuple[SurfacePoint, ...]

    def __post_init__(self):
        times = [p.total_time for p in self.surface if p.total_time is not None]
        if not times:
            raise ValueError("surface holds no detectable sample")
        if self.best_time != min(times):
            raise ValueError("best_time is not the surface minimum")


@dataclass(frozen=True)
class ScanPoint:
    """One scan entry; failed points carry the error text instead of a result."""

    parameter: float
    result: OptimizationResult | None = None
    error: str | None = None


def shots_required(delta_s: float, c: float) -> int | None:
    """Smallest N with delta_s >= 1/(c sqrt(N)); None when unattainable."""
    if not (0 < c <= 1):
        raise ValueError(f"collection factor c = {c} outside (0, 1]")
    if delta_s <= 0:
        return None
    x = 1.0 / (c * delta_s)
    n = max(1, math.ceil(x * x))

    def ok(m: int) -> bool:
        return delta_s >= 1.0 / (c * math.sqrt(m))

    # walk off any floating-point bias in the closed form
    while n > 1 and ok(n - 1):
        n -= 1
    while not ok(n):
        n += 1
    return n


def detection_time(
    spec: SystemSpec,
    model: HamiltonianModel,
    seq: PulseSequence,
    drive: DriveSpec,
    c: float | None = None,
    opts: EvolutionOptions = EvolutionOptions(),
) -> DetectionOutcome:
    """Baseline and driven runs at seq.t_p, then Eq.-of-detection arithmetic."""
    require_valid(spec)
    c = spec.collection_c if c is None else c
    s_off = run_sequence(spec, model, None, seq, opts).s
    s_on = run_sequence(spec, model, drive, seq, opts).s
    return _outcome_from_signals(s_off, s_on, seq.t_p, c)


def _outcome_from_signals(s_off: float, s_on: float, t_p: float, c: float) -> DetectionOutcome:
    delta_s = s_off - s_on
    if delta_s <= DELTA_S_FLOOR:
        raise UndetectableError(
            f"delta_s = {delta_s:.3e} at or below the {DELTA_S_FLOOR} resolution floor"
        )
    n = shots_required(delta_s, c)
    return DetectionOutcome(delta_s=delta_s, n_shots=n, total_time=n * t_p, t_p=t_p)


def default_b_grid(
    span: tuple[float, float] = DEFAULT_B_GRID_SPAN,
    points: int = DEFAULT_B_GRID_POINTS,
) -> tuple[float, ...]:
    lo, hi = span
    if not (0 < lo < hi):
        raise ValueError("b grid span must satisfy 0 < lo < hi")
    return tuple(float(b) for b in np.geomspace(lo, hi, points))


def default_t_grid(
    t2_nv: float,
    factors: tuple[float, float] = DEFAULT_T_GRID_FACTORS,
    points: int = DEFAULT_T_GRID_POINTS,
) -> tuple[float, ...]:
    if not math.isfinite(t2_nv) or t2_nv <= 0:
        raise ValueError("t grid needs a finite positive T2NV reference")
    lo, hi = factors[0] * t2_nv, factors[1] * t2_nv
    return tuple(float(t) for t in np.linspace(lo, hi, points))


def _signal_job(args) -> float:
    spec, model, drive, seq, opts = args
    return run_sequence(spec, model, drive, seq, opts).s


def _map_jobs(jobs, workers: int):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_signal_job, jobs))
    return [_signal_job(j) for j in jobs]


def optimize(
    spec: SystemSpec,
    model: HamiltonianModel,
    seq_kind: str,
    transition_omega: float,
    b_grid,
    t_grid,
    c: float | None = None,
    n: int = 1,
    opts: EvolutionOptions = EvolutionOptions(),
    workers: int = 1,
) -> OptimizationResult:
    """Exhaustive (B_NMR, t_p) scan plus golden-section refinement in t_p.

    Ties break toward smaller t_p, then smaller B_NMR; output is independent
    of evaluation order and worker count.
    """
    require_valid(spec)
    c = spec.collection_c if c is None else c
    b_grid = tuple(float(b) for b in b_grid)
    t_grid = tuple(float(t) for t in t_grid)
    if not b_grid or not t_grid:
        raise ValueError("optimizer grids must be nonempty")

    # drive-off signals depend only on t_p; compute once per grid value
    base_jobs = [(spec, model, None, PulseSequence(seq_kind, t, n), opts) for t in t_grid]
    s_off_by_tp = dict(zip(t_grid, _map_jobs(base_jobs, workers)))

    pairs = [(b, t) for b in b_grid for t in t_grid]
    on_jobs = [
        (spec, model, DriveSpec(b, transition_omega), PulseSequence(seq_kind, t, n), opts)
        for b, t in pairs
    ]
    s_on_values = _map_jobs(on_jobs, workers)

    surface: list[SurfacePoint] = []
    for (b, t), s_on in zip(pairs, s_on_values):
        surface.append(_surface_point(s_off_by_tp[t], s_on, b, t, c, "grid"))

    feasible = [p for p in surface if p.total_time is not None]
    if not feasible:
        raise UndetectableError("every grid point is undetectable")
    best = min(feasible, key=lambda p: (p.total_time, p.t_p, p.b_nmr))

    def refine_eval(t_p: float) -> SurfacePoint:
        seq = PulseSequence(seq_kind, t_p, n)
        s_off = run_sequence(spec, model, None, seq, opts).s
        s_on = run_sequence(spec, model, DriveSpec(best.b_nmr, transition_omega), seq, opts).s
        return _surface_point(s_off, s_on, best.b_nmr, t_p, c, "refine")

    i = t_grid.index(best.t_p)
    lo = t_grid[i - 1] if i > 0 else t_grid[0]
    hi = t_grid[i + 1] if i + 1 < len(t_grid) else t_grid[-1]
    if hi > lo:
        surface.extend(_golden_section(refine_eval, lo, hi))

    feasible = [p for p in surface if p.total_time is not None]
    best = min(feasible, key=lambda p: (p.total_time, p.t_p, p.b_nmr))
    return OptimizationResult(
        best_b_nmr=best.b_nmr,
        best_t_p=best.t_p,
        best_time=best.total_time,
        surface=tuple(surface),
    )


def _surface_point(s_off: float, s_on: float, b: float, t: float, c: float, tag: str) -> SurfacePoint:
    try:
        out = _outcome_from_signals(s_off, s_on, t, c)
        return SurfacePoint(b, t, out.delta_s, out.n_shots, out.total_time, tag)
    except UndetectableError:
        return SurfacePoint(b, t, s_off - s_on, None, None, tag)


def _golden_section(evaluate, a: float, b: float, iterations: int = GOLDEN_ITERATIONS):
    """Golden-section minimization samples of total_time over [a, b]."""
    samples: list[SurfacePoint] = []

    def timed(point: SurfacePoint) -> float:
        return point.total_time if point.total_time is not None else math.inf

    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    pc, pd = evaluate(c), evaluate(d)
    samples += [pc, pd]
    for _ in range(iterations):
        if timed(pc) <= timed(pd):
            b, d, pd = d, c, pc
            c = b - _INVPHI * (b - a)
            pc = evaluate(c)
            samples.append(pc)
        else:
            a, c, pc = c, d, pd
            d = a + _INVPHI * (b - a)
            pd = evaluate(d)
            samples.append(pd)
    return samples


def _on_axis_proton(template: SpinSite | None, spec: SystemSpec, distance: float) -> SpinSite:
    t1 = template.t1 if template is not None else 10e-3
    t2 = template.t2 if template is not None else 1e-3
    gamma = template.gamma if template is not None else spec.constants.gamma_proton
    return SpinSite("H", gamma, (0.0, 0.0, distance), t1=t1, t2=t2)


def scan_distance(
    spec: SystemSpec,
    model: HamiltonianModel,
    distances,
    seq_kind: str = "echo",
    n: int = 1,
    b_grid=None,
    t_grid=None,
    c: float | None = None,
    opts: EvolutionOptions = EvolutionOptions(),
    workers: int = 1,
) -> list[ScanPoint]:
    """Optimized detection time for an on-axis target at each distance."""
    distances = [float(d) for d in distances]
    if not distances:
        raise ValueError("distance list must be nonempty")
    active = spec.active_nuclei
    template = active[0] if active else None
    points = []
    for d in distances:
        site = _on_axis_proton(template, spec, d)
        moved = replace(spec, nuclei=(site,))
        omega = site.gamma * spec.b0
        points.append(_scan_point(
            d, moved, model, seq_kind, omega, b_grid, t_grid, c, n, opts, workers
        ))
    return points


def scan_t2(
    spec: SystemSpec,
    model: HamiltonianModel,
    t2_values,
    seq_kind: str = "echo",
    n: int = 1,
    b_grid=None,
    t_grid=None,
    t_factors: tuple[float, float] = DEFAULT_T_GRID_FACTORS,
    t_points: int = DEFAULT_T_GRID_POINTS,
    c: float | None = None,
    opts: EvolutionOptions = EvolutionOptions(),
    workers: int = 1,
) -> list[ScanPoint]:
    """Optimized detection time as the NV transverse coherence time varies.

    When no explicit t_grid is given, the t_factors x T2NV window is rebuilt
    at each point so the sensing window tracks the coherence time.
    """
    t2_values = [float(t) for t in t2_values]
    if not t2_values:
        raise ValueError("T2 list must be nonempty")
    active = spec.active_nuclei
    omega = (active[0].gamma if active else spec.constants.gamma_proton) * spec.b0
    points = []
    for t2 in t2_values:
        nv = replace(spec.nv, t2=t2, t1=max(spec.nv.t1, t2 / 2))
        adjusted = replace(spec, nv=nv)
        grid_t = t_grid if t_grid is not None else default_t_grid(t2, t_factors, t_points)
        points.append(_scan_point(
            t2, adjusted, model, seq_kind, omega, b_grid, grid_t, c, n, opts, workers
        ))
    return points


def _scan_point(
    parameter, spec, model, seq_kind, omega, b_grid, t_grid, c, n, opts, workers
) -> ScanPoint:
    try:
        result = optimize(
            spec, model, seq_kind, omega,
            b_grid if b_grid is not None else default_b_grid(),
            t_grid if t_grid is not None else default_t_grid(spec.nv.t2),
            c=c, n=n, opts=opts, workers=workers,
        )
        return ScanPoint(parameter=parameter, result=result)
    except (UndetectableError, EvolutionError) as err:
        return ScanPoint(parameter=parameter, error=str(err))
