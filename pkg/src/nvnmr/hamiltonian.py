"""Couplings, drives, and Hamiltonian assembly in selectable frames.

The NV electron is reduced to the two microwave-addressed levels and its
Zeeman + zero-field diagonal is absorbed into the microwave rotating frame,
so the NV factor enters only through the hyperfine Z_nv part. All energies
are angular frequencies (rad/s); index 0 of the tensor product is the NV,
followed by the active nuclei in spec order.

Two frames are supported:

- ``lab_nuclear``: nuclear Zeeman kept explicitly; a drive adds the
  time-dependent circularly polarized term evaluated at absolute time t.
- ``rotating_secular``: every nucleus co-rotates with the drive at omega,
  which renders the drive static, turns the Zeeman term into a detuning,
  and keeps only interaction terms commuting with the total nuclear Zeeman
  (transverse hyperfine components and non-secular dipolar terms average
  out at the Larmor scale).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .quantum import CMatrix, kron, spin_operators
from .system import PhysicalConstants, SpinSite, SystemSpec, require_valid

FRAMES = ("lab_nuclear", "rotating_secular")
NV_COUPLINGS = ("zz_only", "full_secular")

# model validity floors for the point-dipole formulas
MIN_NV_DISTANCE = 1e-10   # 0.1 nm
MIN_PAIR_DISTANCE = 1e-11  # 0.1 angstrom


class GeometryError(ValueError):
    """Positions outside the validity range of the point-dipole model."""


@dataclass(frozen=True)
class HamiltonianModel:
    """Frame and approximation-level switches for the system Hamiltonian."""

    frame: str = "rotating_secular"
    nv_coupling: str = "zz_only"
    include_nuclear_dipolar: bool = True

    def __post_init__(self):
        if self.frame not in FRAMES:
            raise ValueError(f"unknown frame {self.frame!r}; expected one of {FRAMES}")
        if self.nv_coupling not in NV_COUPLINGS:
            raise ValueError(
                f"unknown nv_coupling {self.nv_coupling!r}; expected one of {NV_COUPLINGS}"
            )


@dataclass(frozen=True)
class DriveSpec:
    """Circularly polarized nuclear drive B_NMR [X cos(wt+phi) + Y sin(wt+phi)]."""

    b_nmr: float            # tesla
    omega: float            # rad/s
    phase: float = 0.0      # radians

    def __post_init__(self):
        if not (self.b_nmr >= 0):
            raise ValueError(f"b_nmr must be >= 0, got {self.b_nmr}")
        if not math.isfinite(self.omega):
            raise ValueError("drive omega must be finite")


def coupling_k(position, constants: PhysicalConstants) -> float:
    """Secular NV-nucleus coupling strength k (rad/s), signed.

    k = gamma_nv * gamma_p * hbar * (mu0/4pi) / r^3 * (1 - 3 z^2 / r^2),
    negative on the z-axis and vanishing at the magic angle.
    """
    p = np.asarray(position, dtype=float)
    r = float(np.linalg.norm(p))
    if r <= MIN_NV_DISTANCE:
        raise GeometryError(f"|position| = {r} m is inside the 0.1 nm model floor")
    c = constants
    z = float(p[2])
    # explicit products keep the r -> 2r scaling exact in floating point
    return c.gamma_nv * c.gamma_proton * c.hbar * c.mu0_over_4pi / (r * r * r) * (
        1.0 - 3.0 * (z * z) / (r * r)
    )


def r_max_of(position, constants: PhysicalConstants) -> float:
    """z-axis intercept of the iso-|k| shell through ``position`` (meters).

    On the axis |k| = 2 gamma_nv gamma_p hbar mu0 / (4 pi r^3), so the
    intercept of the contour with coupling |k(position)| is
    (2 gamma_nv gamma_p hbar (mu0/4pi) / |k|)^(1/3).
    """
    k = coupling_k(position, constants)
    c = constants
    r = float(np.linalg.norm(np.asarray(position, dtype=float)))
    on_axis_scale = 2.0 * c.gamma_nv * c.gamma_proton * c.hbar * c.mu0_over_4pi / (r * r * r)
    if abs(k) <= 1e-12 * on_axis_scale:
        raise GeometryError("position lies at the magic angle; iso-|k| shell is unbounded")
    return (2.0 * c.gamma_nv * c.gamma_proton * c.hbar * c.mu0_over_4pi / abs(k)) ** (1.0 / 3.0)


def dipolar_tensor(r_vec, gamma_i: float, gamma_j: float, constants: PhysicalConstants) -> np.ndarray:
    """Point-dipole coupling tensor D (3x3 real, rad/s): H = sum_ab S_i^a D_ab S_j^b.

    D_ab = gamma_i gamma_j hbar (mu0/4pi) / r^3 * (delta_ab - 3 rhat_a rhat_b);
    symmetric and traceless by construction.
    """
    v = np.asarray(r_vec, dtype=float)
    r = float(np.linalg.norm(v))
    if r <= MIN_PAIR_DISTANCE:
        raise GeometryError(f"pair separation {r} m is degenerate")
    rhat = v / r
    pref = gamma_i * gamma_j * constants.hbar * constants.mu0_over_4pi / (r * r * r)
    return pref * (np.eye(3) - 3.0 * np.outer(rhat, rhat))


def _embed(op: CMatrix, index: int, n_factors: int) -> CMatrix:
    """Place a single-spin operator at tensor slot ``index`` among qubits."""
    out = np.eye(1, dtype=complex)
    for k in range(n_factors):
        out = kron(out, op if k == index else np.eye(2, dtype=complex))
    return out


@dataclass(frozen=True)
class OperatorBasis:
    """Embedded spin operators for the NV (slot 0) and the active nuclei."""

    dim: int
    nv_x: CMatrix
    nv_y: CMatrix
    nv_z: CMatrix
    nuc_x: tuple[CMatrix, ...]
    nuc_y: tuple[CMatrix, ...]
    nuc_z: tuple[CMatrix, ...]
    sites: tuple[SpinSite, ...]


def operator_basis(spec: SystemSpec) -> OperatorBasis:
    """Spin-1/2 operators for every simulated factor, embedded in the full space."""
    sx, sy, sz = spin_operators(0.5)
    active = spec.active_nuclei
    n = 1 + len(active)
    return OperatorBasis(
        dim=2**n,
        nv_x=_embed(sx, 0, n),
        nv_y=_embed(sy, 0, n),
        nv_z=_embed(sz, 0, n),
        nuc_x=tuple(_embed(sx, i + 1, n) for i in range(len(active))),
        nuc_y=tuple(_embed(sy, i + 1, n) for i in range(len(active))),
        nuc_z=tuple(_embed(sz, i + 1, n) for i in range(len(active))),
        sites=active,
    )


def _nv_nucleus_term(
    basis: OperatorBasis, i: int, site: SpinSite, model: HamiltonianModel,
    constants: PhysicalConstants,
) -> CMatrix:
    if model.nv_coupling == "zz_only" or model.frame == "rotating_secular":
        # transverse hyperfine rows rotate at the drive frequency in the
        # co-rotating frame and average out; only A_zz = k survives
        k = coupling_k(site.position, constants)
        return k * (basis.nv_z @ basis.nuc_z[i])
    d = dipolar_tensor(site.position, constants.gamma_nv, site.gamma, constants)
    ops = (basis.nuc_x[i], basis.nuc_y[i], basis.nuc_z[i])
    term = np.zeros((basis.dim, basis.dim), dtype=complex)
    for a in range(3):
        term += d[2, a] * ops[a]
    return basis.nv_z @ term


def _dipolar_pair_term(
    basis: OperatorBasis, i: int, j: int, model: HamiltonianModel,
    constants: PhysicalConstants,
) -> CMatrix:
    si, sj = basis.sites[i], basis.sites[j]
    d = dipolar_tensor(si.r - sj.r, si.gamma, sj.gamma, constants)
    if model.frame == "lab_nuclear":
        opsi = (basis.nuc_x[i], basis.nuc_y[i], basis.nuc_z[i])
        opsj = (basis.nuc_x[j], basis.nuc_y[j], basis.nuc_z[j])
        term = np.zeros((basis.dim, basis.dim), dtype=complex)
        for a in range(3):
            for b in range(3):
                if d[a, b] != 0.0:
                    term += d[a, b] * (opsi[a] @ opsj[b])
        return term
    # secular (like-spin) form: D_zz [Z_i Z_j - 1/4 (S+_i S-_j + S-_i S+_j)]
    plus_i = basis.nuc_x[i] + 1j * basis.nuc_y[i]
    minus_i = basis.nuc_x[i] - 1j * basis.nuc_y[i]
    plus_j = basis.nuc_x[j] + 1j * basis.nuc_y[j]
    minus_j = basis.nuc_x[j] - 1j * basis.nuc_y[j]
    flip_flop = plus_i @ minus_j + minus_i @ plus_j
    return d[2, 2] * (basis.nuc_z[i] @ basis.nuc_z[j] - 0.25 * flip_flop)


def hamiltonian_terms(
    spec: SystemSpec,
    model: HamiltonianModel,
    drive: DriveSpec | None,
    basis: OperatorBasis | None = None,
) -> tuple[CMatrix, tuple[tuple[Callable[[float], float], CMatrix], ...]]:
    """Static Hamiltonian plus time-dependent parts as (coefficient, matrix).

    In ``rotating_secular`` everything is static and the parts tuple is
    empty; in ``lab_nuclear`` a nonzero drive contributes the two
    circularly polarized quadratures.
    """
    require_valid(spec)
    if basis is None:
        basis = operator_basis(spec)
    if model.frame == "rotating_secular" and drive is None:
        raise ValueError("rotating_secular frame needs a drive to define the frame frequency")
    c = spec.constants
    h = np.zeros((basis.dim, basis.dim), dtype=complex)

    for i, site in enumerate(basis.sites):
        zeeman = site.gamma * spec.b0
        if model.frame == "rotating_secular":
            h += (zeeman - drive.omega) * basis.nuc_z[i]
            if drive.b_nmr > 0:
                rabi = site.gamma * drive.b_nmr
                h += rabi * (
                    math.cos(drive.phase) * basis.nuc_x[i]
                    + math.sin(drive.phase) * basis.nuc_y[i]
                )
        else:
            h += zeeman * basis.nuc_z[i]
        h += _nv_nucleus_term(basis, i, site, model, c)

    if model.include_nuclear_dipolar:
        for i in range(len(basis.sites)):
            for j in range(i + 1, len(basis.sites)):
                h += _dipolar_pair_term(basis, i, j, model, c)

    parts: tuple[tuple[Callable[[float], float], CMatrix], ...] = ()
    if model.frame == "lab_nuclear" and drive is not None and drive.b_nmr > 0:
        hx = np.zeros((basis.dim, basis.dim), dtype=complex)
        hy = np.zeros((basis.dim, basis.dim), dtype=complex)
        for i, site in enumerate(basis.sites):
            rabi = site.gamma * drive.b_nmr
            hx += rabi * basis.nuc_x[i]
            hy += rabi * basis.nuc_y[i]
        w, phi = drive.omega, drive.phase

        def cos_part(t: float, w=w, phi=phi) -> float:
            return math.cos(w * t + phi)

        def sin_part(t: float, w=w, phi=phi) -> float:
            return math.sin(w * t + phi)

        parts = ((cos_part, hx), (sin_part, hy))
    return h, parts


def build_hamiltonian(
    spec: SystemSpec,
    model: HamiltonianModel,
    drive: DriveSpec | None = None,
    t: float = 0.0,
) -> CMatrix:
    """System Hamiltonian (rad/s) at absolute time ``t``; Hermitian, dim 2^(n+1)."""
    static, parts = hamiltonian_terms(spec, model, drive)
    h = static
    for coeff, m in parts:
        h = h + coeff(t) * m
    return h


def drive_frequency_scale(spec: SystemSpec, model: HamiltonianModel, drive: DriveSpec | None) -> float:
    """Largest angular frequency the integrator must resolve (rad/s)."""
    scale = 0.0
    if drive is not None:
        scale = abs(drive.omega)
    if model.frame == "lab_nuclear":
        for site in spec.active_nuclei:
            scale = max(scale, abs(site.gamma * spec.b0))
    return scale
