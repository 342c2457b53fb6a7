"""Dense complex spin algebra and Lindblad propagation.

Everything here works on plain ``numpy`` arrays of ``complex128`` in row-major
storage. Density matrices are wrapped in :class:`DensityMatrix`, which checks
the physical invariants (Hermiticity, unit trace, positivity) on construction.
The master equation

    drho/dt = -i [H, rho] + sum_k r_k (J_k rho J_k^+ - 1/2 {J_k^+ J_k, rho})

is handled in vectorized (Liouville) form: ``rho`` is stacked column by
column and the generator becomes a ``d^2 x d^2`` matrix. All frequencies are
angular (rad/s); unit conversions happen at the configuration boundary, never
here. Hilbert dimensions are dense-only and capped at MAX_DIM.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

# Dense storage keeps the propagator exact; anything bigger than this should
# not be simulated with full superoperators in the first place.
MAX_DIM = 64

# Alias for readability in signatures: a dense complex matrix.
CMatrix = np.ndarray


class DimensionError(ValueError):
    """Operator or state dimensions are unusable (mismatch or above cap)."""


class EvolutionError(RuntimeError):
    """Time propagation cannot proceed (bad duration or step underflow)."""


def _as_matrix(a: np.ndarray, name: str = "matrix") -> CMatrix:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def _require_square(a: CMatrix, name: str = "matrix") -> CMatrix:
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    return a


def hermiticity_defect(a: CMatrix) -> float:
    """Relative deviation from Hermiticity, max|A - A^+| / max(1, max|A|)."""
    scale = max(1.0, float(np.abs(a).max()) if a.size else 1.0)
    return float(np.abs(a - a.conj().T).max()) / scale


def kron(a: CMatrix, b: CMatrix) -> CMatrix:
    """Kronecker product; the first factor is the most significant subsystem."""
    return np.kron(_as_matrix(a, "a"), _as_matrix(b, "b"))


def matexp(a: CMatrix) -> CMatrix:
    """Matrix exponential (scaling-and-squaring with Pade approximant)."""
    m = _require_square(_as_matrix(a))
    return scipy.linalg.expm(m)


def spin_operators(spin: float) -> tuple[CMatrix, CMatrix, CMatrix]:
    """Dimensionless angular-momentum matrices (Sx, Sy, Sz) for spin 1/2 or 1.

    Sz is diagonal with eigenvalues m = spin .. -spin; hbar does not appear.
    """
    if spin not in (0.5, 1.0):
        raise ValueError(f"unsupported spin quantum number {spin!r}; expected 1/2 or 1")
    dim = int(round(2 * spin + 1))
    m = spin - np.arange(dim)
    sz = np.diag(m).astype(complex)
    # ladder elements <m+1|S+|m> = sqrt(s(s+1) - m(m+1))
    raising = np.zeros((dim, dim), dtype=complex)
    for k in range(1, dim):
        raising[k - 1, k] = math.sqrt(spin * (spin + 1) - m[k] * (m[k] + 1))
    lowering = raising.conj().T
    sx = (raising + lowering) / 2
    sy = (raising - lowering) / (2j)
    return sx, sy, sz


@dataclass(frozen=True)
class DensityMatrix:
    """A physical state over an ordered list of subsystems.

    ``matrix`` is dim x dim; ``subsystem_dims`` gives the local dimensions in
    tensor order (first factor most significant, matching :func:`kron`).
    """

    matrix: CMatrix
    subsystem_dims: tuple[int, ...]

    # construction tolerances
    HERM_TOL = 1e-12
    TRACE_TOL = 1e-9
    EIG_TOL = 1e-9

    def __post_init__(self):
        m = _require_square(_as_matrix(self.matrix, "density matrix"))
        object.__setattr__(self, "matrix", m)
        dims = tuple(int(d) for d in self.subsystem_dims)
        object.__setattr__(self, "subsystem_dims", dims)
        if math.prod(dims) != m.shape[0]:
            raise DimensionError(
                f"subsystem dims {dims} do not multiply to dimension {m.shape[0]}"
            )
        if m.shape[0] > MAX_DIM:
            raise DimensionError(f"dimension {m.shape[0]} exceeds dense cap {MAX_DIM}")
        if hermiticity_defect(m) > self.HERM_TOL:
            raise ValueError(f"density matrix not Hermitian (defect {hermiticity_defect(m):.3e})")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > self.TRACE_TOL:
            raise ValueError(f"density matrix trace {tr} is not 1")
        # symmetrize before the eigenvalue check so asymmetric rounding does
        # not manufacture spurious negative eigenvalues
        lo = float(np.linalg.eigvalsh((m + m.conj().T) / 2).min())
        if lo < -self.EIG_TOL:
            raise ValueError(f"density matrix has negative eigenvalue {lo:.3e}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


def maximally_mixed(subsystem_dims: Sequence[int]) -> DensityMatrix:
    """Identity/d over the product of the given subsystem dimensions."""
    dims = tuple(int(d) for d in subsystem_dims)
    d = math.prod(dims)
    return DensityMatrix(np.eye(d, dtype=complex) / d, dims)


def pure_state(vector: np.ndarray, subsystem_dims: Sequence[int]) -> DensityMatrix:
    v = np.asarray(vector, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj()), tuple(subsystem_dims))


def partial_trace(rho: DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    """Reduced state over the subsystems in ``keep`` (ordering preserved)."""
    keep = sorted(set(int(k) for k in keep))
    n = len(rho.subsystem_dims)
    if not keep:
        raise ValueError("keep must name at least one subsystem")
    if any(k < 0 or k >= n for k in keep):
        raise IndexError(f"keep indices {keep} invalid for {n} subsystems")
    dims = rho.subsystem_dims
    t = rho.matrix.reshape(dims + dims)
    # drop from the highest subsystem index down so earlier axis numbers stay valid
    for ax in sorted(set(range(n)) - set(keep), reverse=True):
        t = np.trace(t, axis1=ax, axis2=ax + t.ndim // 2)
    kept = tuple(dims[k] for k in keep)
    d = math.prod(kept)
    return DensityMatrix(t.reshape(d, d), kept)


@dataclass(frozen=True)
class LindbladChannel:
    """One dissipative channel: jump operator with a nonnegative rate (1/s)."""

    jump: CMatrix
    rate: float
    label: str = ""

    def __post_init__(self):
        j = _require_square(_as_matrix(self.jump, "jump operator"))
        object.__setattr__(self, "jump", j)
        if not (self.rate >= 0.0):
            raise ValueError(f"channel rate must be >= 0, got {self.rate}")


@dataclass(frozen=True)
class Superoperator:
    """Generator acting on column-vectorized density matrices (d^2 x d^2)."""

    dim: int
    matrix: CMatrix

    def __post_init__(self):
        m = _require_square(_as_matrix(self.matrix, "superoperator"))
        object.__setattr__(self, "matrix", m)
        if m.shape[0] != self.dim * self.dim:
            raise DimensionError(
                f"superoperator shape {m.shape} does not match dim {self.dim}"
            )


@dataclass(frozen=True)
class TimeDependentGenerator:
    """Liouvillian of the form L(t) = static + sum_k coeff_k(t) * part_k.

    Keeping the time dependence in scalar coefficient functions lets the
    stepped integrator reuse the constant component matrices.
    """

    static: Superoperator
    parts: tuple[tuple[Callable[[float], float], Superoperator], ...] = ()
    frequency_scale: float = 0.0  # largest angular frequency in the generator

    @property
    def dim(self) -> int:
        return self.static.dim


def vectorize(rho: CMatrix) -> np.ndarray:
    """Stack columns (Fortran order)."""
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvectorize(v: np.ndarray, dim: int) -> CMatrix:
    return np.asarray(v, dtype=complex).reshape((dim, dim), order="F")


def liouvillian(h: CMatrix, channels: Sequence[LindbladChannel] = ()) -> Superoperator:
    """Vectorized generator of -i[H, .] plus the given dissipators (rad/s)."""
    hm = _require_square(_as_matrix(h, "hamiltonian"))
    d = hm.shape[0]
    if d > MAX_DIM:
        raise DimensionError(f"dimension {d} exceeds dense cap {MAX_DIM}")
    if hermiticity_defect(hm) > 1e-10:
        raise ValueError("hamiltonian is not Hermitian")
    eye = np.eye(d, dtype=complex)
    # column stacking: vec(A rho B) = (B^T kron A) vec(rho)
    lv = -1j * (np.kron(eye, hm) - np.kron(hm.T, eye))
    for ch in channels:
        j = ch.jump
        if j.shape[0] != d:
            raise DimensionError(
                f"channel dimension {j.shape[0]} does not match system dimension {d}"
            )
        if ch.rate == 0.0:
            continue
        jdj = j.conj().T @ j
        lv += ch.rate * (
            np.kron(j.conj(), j)
            - 0.5 * np.kron(eye, jdj)
            - 0.5 * np.kron(jdj.T, eye)
        )
    return Superoperator(d, lv)


@dataclass(frozen=True)
class EvolutionOptions:
    """Propagation controls.

    backend ``exact_piecewise`` exponentiates the constant generator;
    ``stepped`` integrates the vectorized equation with classic fixed-step
    RK4. ``max_step`` caps the RK4 step (seconds); on top of that the step is
    always held below 1/(50 f_max) and shrunk further until the estimated
    phase/amplitude error is below ``tolerance``.
    """

    backend: str = "exact_piecewise"
    max_step: float | None = None
    tolerance: float = 1e-6

    def __post_init__(self):
        if self.backend not in ("exact_piecewise", "stepped"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.max_step is not None and not (self.max_step > 0):
            raise ValueError("max_step must be positive")
        if not (0 < self.tolerance <= 1e-3):
            raise ValueError("tolerance must lie in (0, 1e-3]")


def _rk4_step_size(
    omega_scale: float, duration: float, options: EvolutionOptions
) -> float:
    """Fixed RK4 step honouring the 50-steps-per-fastest-period floor.

    The accuracy model is the classic one for oscillatory modes: per unit
    time the RK4 amplitude/phase error is ~ omega (omega h)^4 / 120, so the
    phase increment per step theta = omega h is chosen from the requested
    tolerance and clamped to 2*pi/50.
    """
    omega = max(omega_scale, 1.0)
    theta_cap = 2 * math.pi / 50
    budget = 120.0 * options.tolerance / max(omega * duration, 1e-30)
    theta = min(theta_cap, budget ** 0.25)
    h = theta / omega
    if options.max_step is not None:
        h = min(h, options.max_step)
    if h <= 0 or not math.isfinite(h):
        raise EvolutionError(f"step size underflow (h = {h})")
    steps = duration / h
    if steps > 5e7:
        raise EvolutionError(f"step size underflow: {steps:.3g} steps required")
    return h


def evolve(
    rho: DensityMatrix,
    generator: Superoperator | TimeDependentGenerator,
    duration: float,
    options: EvolutionOptions = EvolutionOptions(),
    t0: float = 0.0,
) -> DensityMatrix:
    """Propagate ``rho`` for ``duration`` seconds under the generator.

    Constant generators may use either backend; time-dependent generators
    require the stepped backend (the drive phase is tracked from absolute
    time ``t0``).
    """
    if duration < 0:
        raise EvolutionError(f"negative duration {duration}")
    if duration == 0:
        return rho
    if isinstance(generator, Superoperator):
        if generator.dim != rho.dim:
            raise DimensionError("generator/state dimension mismatch")
        if options.backend == "exact_piecewise":
            prop = matexp(generator.matrix * duration)
            out = unvectorize(prop @ vectorize(rho.matrix), rho.dim)
            return DensityMatrix(out, rho.subsystem_dims)
        omega = spectral_scale(generator)
        v = _rk4_constant(generator.matrix, vectorize(rho.matrix), duration,
                          _rk4_step_size(omega, duration, options))
        return DensityMatrix(unvectorize(v, rho.dim), rho.subsystem_dims)
    if options.backend == "exact_piecewise":
        raise EvolutionError("time-dependent generator requires the stepped backend")
    if generator.dim != rho.dim:
        raise DimensionError("generator/state dimension mismatch")
    omega = max(generator.frequency_scale, spectral_scale(generator.static))
    h = _rk4_step_size(omega, duration, options)
    v = _rk4_timedep(generator, vectorize(rho.matrix), t0, duration, h)
    return DensityMatrix(unvectorize(v, rho.dim), rho.subsystem_dims)


def spectral_scale(sup: Superoperator) -> float:
    """Cheap upper estimate of the generator's largest angular frequency."""
    return float(np.linalg.norm(sup.matrix, ord=np.inf))


def _rk4_constant(lm: CMatrix, v: np.ndarray, duration: float, h: float) -> np.ndarray:
    n = max(1, int(math.ceil(duration / h)))
    dt = duration / n
    for _ in range(n):
        k1 = lm @ v
        k2 = lm @ (v + 0.5 * dt * k1)
        k3 = lm @ (v + 0.5 * dt * k2)
        k4 = lm @ (v + dt * k3)
        v = v + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return v


def _rk4_timedep(
    gen: TimeDependentGenerator, v: np.ndarray, t0: float, duration: float, h: float
) -> np.ndarray:
    l0 = gen.static.matrix
    parts = [(f, s.matrix) for f, s in gen.parts]

    def apply(t: float, x: np.ndarray) -> np.ndarray:
        y = l0 @ x
        for f, m in parts:
            y = y + f(t) * (m @ x)
        return y

    n = max(1, int(math.ceil(duration / h)))
    dt = duration / n
    t = t0
    for _ in range(n):
        k1 = apply(t, v)
        k2 = apply(t + 0.5 * dt, v + 0.5 * dt * k1)
        k3 = apply(t + 0.5 * dt, v + 0.5 * dt * k2)
        k4 = apply(t + dt, v + dt * k3)
        v = v + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t += dt
    return v


def relaxation_channels(
    sx: CMatrix, sy: CMatrix, sz: CMatrix, t1: float, t2: float, label: str = ""
) -> list[LindbladChannel]:
    """Channels reproducing longitudinal decay T1 and total transverse decay T2.

    T1 enters as raising and lowering jumps at 1/(2 T1) each, which drives the
    spin to the maximally mixed state and contributes 1/(2 T1) to transverse
    decay; the pure-dephasing rate 2/T2 - 1/T1 then makes the off-diagonal
    decay of an isolated spin exactly exp(-t/T2). Requires T2 <= 2 T1.
    """
    if t2 > 2 * t1 * (1 + 1e-12):
        raise ValueError(f"T2 = {t2} exceeds 2*T1 = {2 * t1}")
    channels = []
    if math.isfinite(t1):
        raising = sx + 1j * sy
        lowering = sx - 1j * sy
        rate = 1.0 / (2.0 * t1)
        channels.append(LindbladChannel(raising, rate, f"{label}+"))
        channels.append(LindbladChannel(lowering, rate, f"{label}-"))
    dephasing = 2.0 / t2 - (1.0 / t1 if math.isfinite(t1) else 0.0)
    if math.isfinite(t2) and dephasing > 0:
        channels.append(LindbladChannel(sz, dephasing, f"{label}z"))
    return channels


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """(1/2) ||a - b||_1 via the Hermitian eigenvalues of the difference."""
    diff = a.matrix - b.matrix
    diff = (diff + diff.conj().T) / 2
    return 0.5 * float(np.abs(np.linalg.eigvalsh(diff)).sum())
