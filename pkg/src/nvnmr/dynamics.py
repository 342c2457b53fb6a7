"""Pulse-sequence engine: NV control sequences and the optical signal S.

A run is (pi/2)_y on the NV, free (driven) evolution segments separated by
ideal pi_x pulses at the sequence's pulse times, then (pi/2)_{-y} and
readout of the NV |0> population. The convention is fixed so that zero
accumulated phase gives the bright state S = 1. NV pulses are instantaneous
unitaries on the NV factor only; the nuclear drive runs continuously through
them, with its phase tracked in absolute time.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .hamiltonian import (
    DriveSpec,
    HamiltonianModel,
    OperatorBasis,
    drive_frequency_scale,
    hamiltonian_terms,
    operator_basis,
)
from .quantum import (
    DensityMatrix,
    EvolutionOptions,
    LindbladChannel,
    Superoperator,
    TimeDependentGenerator,
    evolve,
    kron,
    liouvillian,
    matexp,
    partial_trace,
    relaxation_channels,
    unvectorize,
    vectorize,
)
from .system import SystemSpec, require_valid

SEQUENCE_KINDS = ("echo", "cpmg", "uhrig")

_SQ2 = 1.0 / math.sqrt(2.0)
# R_y(pi/2), R_x(pi), R_y(-pi/2) on the NV qubit
_U90Y = np.array([[_SQ2, -_SQ2], [_SQ2, _SQ2]], dtype=complex)
_U180X = np.array([[0.0, -1j], [-1j, 0.0]], dtype=complex)
_U90MY = np.array([[_SQ2, _SQ2], [-_SQ2, _SQ2]], dtype=complex)


@dataclass(frozen=True)
class PulseSequence:
    """A decoupling sequence of ``n_pi`` ideal pi pulses over total time t_p."""

    kind: str
    t_p: float
    n: int = 1

    def __post_init__(self):
        if self.kind not in SEQUENCE_KINDS:
            raise ValueError(f"unknown sequence kind {self.kind!r}; expected one of {SEQUENCE_KINDS}")
        if not (self.t_p > 0):
            raise ValueError(f"t_p must be positive, got {self.t_p}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"pulse count n must be an integer >= 1, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if self.kind == "echo" and self.n != 1:
            raise ValueError("echo is the single-pulse sequence; use cpmg for n > 1")

    @property
    def n_pi(self) -> int:
        return self.n


def pulse_times(seq: PulseSequence) -> list[float]:
    """pi-pulse instants in (0, t_p)."""
    if seq.kind == "echo":
        return [seq.t_p / 2.0]
    if seq.kind == "cpmg":
        return [seq.t_p * (2 * k - 1) / (2 * seq.n) for k in range(1, seq.n + 1)]
    return [seq.t_p * math.sin(math.pi * k / (2 * seq.n + 2)) ** 2 for k in range(1, seq.n + 1)]


def matched_drive(seq: PulseSequence, gamma: float) -> float:
    """Drive field (tesla) synchronising the target Rabi cycle with the sequence.

    One target half-flip per interpulse interval: Rabi frequency n_pi / t_p,
    so B_NMR = 2 pi (n_pi / t_p) / gamma.
    """
    return 2.0 * math.pi * (seq.n_pi / seq.t_p) / gamma


@dataclass(frozen=True)
class SignalResult:
    """NV readout probability with the final state and timing diagnostics."""

    s: float
    rho_final: DensityMatrix
    wall_segments: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if not (-1e-9 <= self.s <= 1.0 + 1e-9):
            raise ValueError(f"signal S = {self.s} outside [0, 1] beyond tolerance")


def reference_drive(spec: SystemSpec) -> DriveSpec:
    """Zero-amplitude drive pinning the rotating frame at the nuclear Larmor.

    With B_NMR = 0 the signal is independent of the frame frequency (the
    frame rotation commutes with every retained drive-off term), so any
    finite choice works; the first active nucleus's Larmor keeps detunings
    near zero.
    """
    active = spec.active_nuclei
    omega = active[0].gamma * spec.b0 if active else 0.0
    return DriveSpec(b_nmr=0.0, omega=omega, phase=0.0)


def _relaxation(spec: SystemSpec, basis: OperatorBasis) -> list[LindbladChannel]:
    channels = relaxation_channels(
        basis.nv_x, basis.nv_y, basis.nv_z, spec.nv.t1, spec.nv.t2, "nv"
    )
    for i, site in enumerate(basis.sites):
        channels += relaxation_channels(
            basis.nuc_x[i], basis.nuc_y[i], basis.nuc_z[i], site.t1, site.t2, site.label
        )
    return channels


def build_generator(
    spec: SystemSpec,
    model: HamiltonianModel,
    drive: DriveSpec | None,
    basis: OperatorBasis | None = None,
) -> Superoperator | TimeDependentGenerator:
    """Full Liouvillian (Hamiltonian + relaxation) for one run."""
    if basis is None:
        basis = operator_basis(spec)
    static, parts = hamiltonian_terms(spec, model, drive, basis)
    channels = _relaxation(spec, basis)
    lv = liouvillian(static, channels)
    if not parts:
        return lv
    return TimeDependentGenerator(
        static=lv,
        parts=tuple((coeff, liouvillian(m)) for coeff, m in parts),
        frequency_scale=drive_frequency_scale(spec, model, drive),
    )


def _nv_unitary(u: np.ndarray, nuclear_dim: int) -> np.ndarray:
    return kron(u, np.eye(nuclear_dim, dtype=complex))


def run_sequence(
    spec: SystemSpec,
    model: HamiltonianModel,
    drive: DriveSpec | None,
    seq: PulseSequence,
    opts: EvolutionOptions = EvolutionOptions(),
) -> SignalResult:
    """Evolve |0><0|_NV x I/2^n through the sequence and read out S."""
    require_valid(spec)
    basis = operator_basis(spec)
    n_nuc = len(basis.sites)
    dims = (2,) + (2,) * n_nuc
    nuc_dim = 2**n_nuc

    t_build = time.perf_counter()
    if model.frame == "rotating_secular" and drive is None:
        drive = reference_drive(spec)
    gen = build_generator(spec, model, drive, basis)
    wall_build = time.perf_counter() - t_build

    rho = kron(np.diag([1.0, 0.0]).astype(complex), np.eye(nuc_dim, dtype=complex) / nuc_dim)
    u90y = _nv_unitary(_U90Y, nuc_dim)
    u180x = _nv_unitary(_U180X, nuc_dim)
    u90my = _nv_unitary(_U90MY, nuc_dim)

    exact_path = isinstance(gen, Superoperator) and opts.backend == "exact_piecewise"
    prop_cache: dict[float, np.ndarray] = {}
    dim = 2 * nuc_dim

    def propagate(m: np.ndarray, duration: float, t_abs: float) -> np.ndarray:
        if duration == 0.0:
            return m
        if exact_path:
            p = prop_cache.get(duration)
            if p is None:
                p = matexp(gen.matrix * duration)
                prop_cache[duration] = p
            return unvectorize(p @ vectorize(m), dim)
        out = evolve(DensityMatrix(m, dims), gen, duration, opts, t0=t_abs)
        return out.matrix

    t_evolve = time.perf_counter()
    rho = u90y @ rho @ u90y.conj().T
    boundaries = [0.0] + pulse_times(seq) + [seq.t_p]
    for k in range(len(boundaries) - 1):
        rho = propagate(rho, boundaries[k + 1] - boundaries[k], boundaries[k])
        if k < len(boundaries) - 2:
            rho = u180x @ rho @ u180x.conj().T
    rho = u90my @ rho @ u90my.conj().T
    wall_evolve = time.perf_counter() - t_evolve

    rho_final = DensityMatrix(rho, dims)
    nv = partial_trace(rho_final, [0])
    s = float(np.real(nv.matrix[0, 0]))
    return SignalResult(
        s=s,
        rho_final=rho_final,
        wall_segments=(("generator", wall_build), ("evolution", wall_evolve)),
    )


def baseline_curve(
    spec: SystemSpec,
    model: HamiltonianModel,
    seq_kind: str,
    t_p_grid: Sequence[float],
    n: int = 1,
    opts: EvolutionOptions = EvolutionOptions(),
) -> list[tuple[float, float]]:
    """Drive-off decoherence envelope S(t_p) over an ascending t_p grid."""
    grid = [float(t) for t in t_p_grid]
    if not grid:
        raise ValueError("t_p grid must be nonempty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("t_p grid must be strictly ascending")
    drive = reference_drive(spec) if model.frame == "rotating_secular" else None
    out = []
    for t_p in grid:
        seq = PulseSequence(seq_kind, t_p, n)
        out.append((t_p, run_sequence(spec, model, drive, seq, opts).s))
    return out
