"""Physical scene description: constants, spin sites, built-in molecules.

Positions are in meters with the NV centre at the origin and the static field
B0 along +z (the NV quantization axis). All value types are immutable; the
math modules consume them read-only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class PhysicalConstants:
    """Gyromagnetic ratios and field constants, SI with angular frequencies.

    Defaults are the CODATA electron / proton values; the zero-field
    splitting is the NV ground-state 2.87 GHz.
    """

    gamma_nv: float = 1.76085963023e11      # rad/s/T
    gamma_proton: float = 2.6752218744e8    # rad/s/T
    mu0_over_4pi: float = 1e-7              # T*m/A
    hbar: float = 1.054571817e-34           # J*s
    delta_zfs: float = TWO_PI * 2.87e9      # rad/s

    def __post_init__(self):
        for name in ("gamma_nv", "gamma_proton", "mu0_over_4pi", "hbar", "delta_zfs"):
            if not (getattr(self, name) > 0):
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class SpinSite:
    """One spin: the NV electron or a target nucleus.

    ``two_level`` marks the NV, whose spin-1 manifold is reduced to the two
    microwave-addressed levels; it occupies a 2-dimensional factor in the
    simulation regardless of ``spin``. Inactive sites are carried for
    documentation but contribute nothing to any Hamiltonian or state.
    """

    label: str
    gamma: float                      # rad/s/T
    position: tuple[float, float, float]  # meters
    spin: float = 0.5
    t1: float = math.inf              # seconds
    t2: float = math.inf              # seconds
    active: bool = True
    two_level: bool = False

    def __post_init__(self):
        pos = tuple(float(x) for x in self.position)
        if len(pos) != 3 or not all(math.isfinite(x) for x in pos):
            raise ValueError(f"position must be a finite 3-vector, got {self.position!r}")
        object.__setattr__(self, "position", pos)
        if not (self.t1 > 0):
            raise ValueError(f"site {self.label!r}: T1 must be positive")
        if not (self.t2 > 0):
            raise ValueError(f"site {self.label!r}: T2 must be positive")
        if self.t2 > 2 * self.t1 * (1 + 1e-12):
            raise ValueError(f"site {self.label!r}: T2 = {self.t2} exceeds 2*T1 = {2 * self.t1}")

    @property
    def r(self) -> np.ndarray:
        return np.array(self.position)


def nv_site(t1: float = 5e-3, t2: float = 1e-3, constants: PhysicalConstants | None = None) -> SpinSite:
    """The NV electron at the origin, reduced to its addressed 2-level subspace."""
    c = constants or PhysicalConstants()
    return SpinSite("NV", c.gamma_nv, (0.0, 0.0, 0.0), spin=1.0, t1=t1, t2=t2, two_level=True)


@dataclass(frozen=True)
class SystemSpec:
    """Full scene: field, NV probe, target nuclei, constants, readout factor C."""

    b0: float                          # tesla, along +z
    nv: SpinSite
    nuclei: tuple[SpinSite, ...]
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    collection_c: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "nuclei", tuple(self.nuclei))

    @property
    def active_nuclei(self) -> tuple[SpinSite, ...]:
        return tuple(s for s in self.nuclei if s.active)


@dataclass(frozen=True)
class Violation:
    """One failed validation rule, tied to the offending field or site."""

    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.field}: {self.message}"


def validate(spec: SystemSpec) -> list[Violation]:
    """All rule violations in the scene (empty list means valid)."""
    out: list[Violation] = []
    if tuple(spec.nv.position) != (0.0, 0.0, 0.0):
        out.append(Violation("nv.position", "NV centre must sit at the origin"))
    n = len(spec.nuclei)
    if not (1 <= n <= 5):
        out.append(Violation("nuclei", f"need between 1 and 5 nuclei, got {n}"))
    if not (0 < spec.collection_c <= 1):
        out.append(Violation("collection_c", f"C = {spec.collection_c} outside (0, 1]"))
    sites = [spec.nv] + list(spec.nuclei)
    for s in sites:
        if s.t2 > 2 * s.t1 * (1 + 1e-12):
            out.append(Violation(f"site[{s.label}]", f"T2 = {s.t2} exceeds 2*T1 = {2 * s.t1}"))
    for s in spec.nuclei:
        if np.linalg.norm(s.r) < 1e-10:
            out.append(Violation(f"site[{s.label}]", "nucleus placed at the NV origin"))
    for i in range(len(sites)):
        for j in range(i + 1, len(sites)):
            if sites[i] is spec.nv or sites[j] is spec.nv:
                continue
            d = np.linalg.norm(sites[i].r - sites[j].r)
            if d < 1e-12:
                out.append(Violation(
                    f"site[{sites[i].label}]",
                    f"coincides with site {sites[j].label!r}",
                ))
    return out


def require_valid(spec: SystemSpec) -> SystemSpec:
    issues = validate(spec)
    if issues:
        raise ValueError("invalid system spec: " + "; ".join(str(v) for v in issues))
    return spec


def larmor_frequency(site: SpinSite, b0: float) -> float:
    """Bare precession frequency gamma * B0 (rad/s)."""
    return site.gamma * b0


# Rigid standard organic geometry; all lengths in meters, angles in radians.
# These are overridable so peak positions can be studied against geometry.
BOND_CH = 1.09e-10
BOND_CO = 1.43e-10
BOND_OH = 0.96e-10
ALDEHYDE_CH = 1.11e-10
ALDEHYDE_TILT = math.radians(120.0)
TETRAHEDRAL = math.radians(109.47122063449069)

MOLECULE_KINDS = ("aldehyde", "hydroxymethyl", "methyl")


def _rot_z(phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _tilted(tilt: float, azimuth: float) -> np.ndarray:
    """Unit vector at polar angle ``tilt`` from +z."""
    return np.array([
        math.sin(tilt) * math.cos(azimuth),
        math.sin(tilt) * math.sin(azimuth),
        math.cos(tilt),
    ])


def builtin_molecule(
    kind: str,
    standoff: float,
    azimuth: float = 0.0,
    t1: float = 10e-3,
    t2: float = 1e-3,
    constants: PhysicalConstants | None = None,
    bond_ch: float = BOND_CH,
    aldehyde_ch: float = ALDEHYDE_CH,
    aldehyde_tilt: float = ALDEHYDE_TILT,
    tetrahedral: float = TETRAHEDRAL,
) -> tuple[SpinSite, ...]:
    """Proton sites of a surface-bonded chemical group above the NV.

    The anchor carbon sits at (0, 0, standoff) with its bond to the surface
    along -z, so the molecular bond axis coincides with the field axis. The
    group is rigidly rotated by ``azimuth`` about z. Only 1H sites are
    generated (13C is ignored at ~1% natural abundance); the exchangeable
    hydroxyl proton is returned inactive rather than omitted.
    """
    if kind not in MOLECULE_KINDS:
        raise ValueError(f"unknown molecule kind {kind!r}; expected one of {MOLECULE_KINDS}")
    if not (1e-9 <= standoff <= 50e-9):
        raise ValueError(f"standoff {standoff} m outside [1 nm, 50 nm]")
    c = constants or PhysicalConstants()
    anchor = np.array([0.0, 0.0, standoff])
    rot = _rot_z(azimuth)
    # substituent bonds of a carbon bonded to the surface along -z point
    # tetrahedral-angle away from that bond, i.e. (pi - tetrahedral) from +z
    up_tilt = math.pi - tetrahedral

    def site(label: str, pos: np.ndarray, active: bool = True) -> SpinSite:
        return SpinSite(label, c.gamma_proton, tuple(rot @ pos), spin=0.5,
                        t1=t1, t2=t2, active=active)

    if kind == "aldehyde":
        h = anchor + aldehyde_ch * _tilted(aldehyde_tilt, 0.0)
        return (site("CHO:H", h),)

    if kind == "methyl":
        return tuple(
            site(f"CH3:H{k + 1}", anchor + bond_ch * _tilted(up_tilt, k * TWO_PI / 3))
            for k in range(3)
        )

    # hydroxymethyl: two methylene protons plus the inactive hydroxyl proton
    h1 = anchor + bond_ch * _tilted(up_tilt, 0.0)
    h2 = anchor + bond_ch * _tilted(up_tilt, TWO_PI / 3)
    o_dir = _tilted(up_tilt, 2 * TWO_PI / 3)
    o = anchor + BOND_CO * o_dir
    # O-H bond tilted tetrahedral-angle away from the O-C bond, in the plane
    # containing the C-O bond and z
    co = -o_dir
    perp = np.array([0.0, 0.0, 1.0]) - np.dot(np.array([0.0, 0.0, 1.0]), co) * co
    perp = perp / np.linalg.norm(perp)
    oh_dir = math.cos(tetrahedral) * co + math.sin(tetrahedral) * perp
    h3 = o + BOND_OH * oh_dir
    return (site("CH2OH:H1", h1), site("CH2OH:H2", h2), site("CH2OH:OH", h3, active=False))
