"""Operator algebra and Lindblad propagation checks.

Expected values marked "frozen" were computed from the closed-form solutions
quoted next to them, independently of the code under test.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nvnmr import quantum as q

SX2, SY2, SZ2 = q.spin_operators(0.5)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def random_density(rng: np.random.Generator, dims: tuple[int, ...]) -> q.DensityMatrix:
    d = math.prod(dims)
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = g @ g.conj().T
    return q.DensityMatrix(m / np.trace(m), dims)


def random_hermitian(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (g + g.conj().T) / 2


# ---------------------------------------------------------------- operators


def test_spin_half_is_half_pauli():
    assert np.allclose(SX2, PAULI_X / 2)
    assert np.allclose(SY2, PAULI_Y / 2)
    assert np.allclose(SZ2, PAULI_Z / 2)


@pytest.mark.parametrize("spin", [0.5, 1.0])
def test_angular_momentum_algebra(spin):
    sx, sy, sz = q.spin_operators(spin)
    assert np.allclose(sx @ sy - sy @ sx, 1j * sz, atol=1e-14)
    casimir = sx @ sx + sy @ sy + sz @ sz
    d = sx.shape[0]
    assert np.allclose(casimir, spin * (spin + 1) * np.eye(d), atol=1e-14)
    assert np.allclose(np.diag(sz), spin - np.arange(d))


def test_spin_operators_reject_unsupported():
    with pytest.raises(ValueError):
        q.spin_operators(1.5)


def test_kron_ordering():
    a = np.array([[1, 2], [3, 4]], dtype=complex)
    b = np.eye(3, dtype=complex)
    k = q.kron(a, b)
    assert k.shape == (6, 6)
    # first factor is most significant: top-left 3x3 block is a[0,0] * I
    assert np.allclose(k[:3, :3], np.eye(3))
    assert np.allclose(k[:3, 3:], 2 * np.eye(3))


def test_matexp_pauli_rotation():
    # exp(-i (pi/2) sigma_x) = -i sigma_x
    u = q.matexp(-1j * (math.pi / 2) * PAULI_X)
    assert np.allclose(u, -1j * PAULI_X, atol=1e-12)
    assert np.allclose(q.matexp(np.zeros((3, 3))), np.eye(3))


def test_matexp_rejects_nonsquare():
    with pytest.raises(q.DimensionError):
        q.matexp(np.ones((2, 3)))


def test_hermiticity_defect():
    assert q.hermiticity_defect(PAULI_Y) == 0.0
    assert q.hermiticity_defect(np.array([[0, 1], [0, 0]], dtype=complex)) == pytest.approx(1.0)


# ------------------------------------------------------------------- states


def test_density_matrix_rejects_bad_trace():
    with pytest.raises(ValueError, match="trace"):
        q.DensityMatrix(np.eye(2, dtype=complex), (2,))


def test_density_matrix_rejects_non_hermitian():
    m = np.array([[0.5, 0.1], [0.0, 0.5]], dtype=complex)
    with pytest.raises(ValueError, match="Hermitian"):
        q.DensityMatrix(m, (2,))


def test_density_matrix_rejects_negative_eigenvalue():
    m = np.diag([1.5, -0.5]).astype(complex)
    with pytest.raises(ValueError, match="negative"):
        q.DensityMatrix(m, (2,))


def test_density_matrix_rejects_dim_mismatch():
    with pytest.raises(q.DimensionError):
        q.DensityMatrix(np.eye(4, dtype=complex) / 4, (2, 3))


def test_density_matrix_enforces_cap():
    d = q.MAX_DIM * 2
    with pytest.raises(q.DimensionError):
        q.DensityMatrix(np.eye(d, dtype=complex) / d, (d,))


def test_maximally_mixed_purity():
    rho = q.maximally_mixed((2, 3))
    assert rho.dim == 6
    assert rho.purity() == pytest.approx(1 / 6)


def test_pure_state_normalizes():
    rho = q.pure_state(np.array([3.0, 4.0]), (2,))
    assert rho.purity() == pytest.approx(1.0)
    assert rho.matrix[0, 0] == pytest.approx(9 / 25)


def test_partial_trace_product_state():
    rng = np.random.default_rng(7)
    a = random_density(rng, (2,))
    b = random_density(rng, (3,))
    ab = q.DensityMatrix(np.kron(a.matrix, b.matrix), (2, 3))
    assert np.allclose(q.partial_trace(ab, [0]).matrix, a.matrix, atol=1e-12)
    assert np.allclose(q.partial_trace(ab, [1]).matrix, b.matrix, atol=1e-12)
    both = q.partial_trace(ab, [0, 1])
    assert np.allclose(both.matrix, ab.matrix)


def test_partial_trace_bell_state():
    bell = q.pure_state(np.array([1, 0, 0, 1]) / math.sqrt(2), (2, 2))
    reduced = q.partial_trace(bell, [0])
    assert np.allclose(reduced.matrix, np.eye(2) / 2, atol=1e-12)


def test_partial_trace_rejects_bad_keep():
    rho = q.maximally_mixed((2, 2))
    with pytest.raises(ValueError):
        q.partial_trace(rho, [])
    with pytest.raises(IndexError):
        q.partial_trace(rho, [2])


# ------------------------------------------------------------ vectorization


def test_vectorize_column_stacking_identity():
    # vec(A rho B) = (B^T kron A) vec(rho), the identity the Liouvillian uses
    rng = np.random.default_rng(11)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    r = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    lhs = q.vectorize(a @ r @ b)
    rhs = np.kron(b.T, a) @ q.vectorize(r)
    assert np.allclose(lhs, rhs, atol=1e-12)
    assert np.allclose(q.unvectorize(q.vectorize(r), 3), r)


def test_liouvillian_rejects_non_hermitian_h():
    with pytest.raises(ValueError, match="Hermitian"):
        q.liouvillian(np.array([[0, 1], [0, 0]], dtype=complex))


def test_channel_rejects_negative_rate():
    with pytest.raises(ValueError):
        q.LindbladChannel(PAULI_Z, -1.0)


# ---------------------------------------------------------------- evolution


def test_rabi_oscillation_exact():
    # H = (Omega/2) sigma_x from |0>: P_1(t) = sin^2(Omega t / 2).
    # Frozen at Omega/2pi = 50 kHz, t = 3.7 us: P_1 = 0.30142605468260963
    omega = 2 * math.pi * 50e3
    gen = q.liouvillian(omega * SX2)
    rho = q.pure_state(np.array([1.0, 0.0]), (2,))
    out = q.evolve(rho, gen, 3.7e-6)
    assert out.matrix[1, 1].real == pytest.approx(0.30142605468260963, abs=1e-12)


# Isolated spin-1/2 with H = (omega0/2) sigma_z and (T1, T2) relaxation obeys
# the Bloch equations:
#   rho_01(t) = rho_01(0) exp(-i omega0 t) exp(-t/T2)
#   <sigma_z>(t) = <sigma_z>(0) exp(-t/T1)
# Start is cos(pi/6)|0> + sin(pi/6)|1>, omega0/2pi = 3 kHz, T1 = 2 ms,
# T2 = 1 ms, t = 0.4 ms. Frozen solution:
BLOCH_SZ = 0.409365376538991
BLOCH_C01 = 0.08969437486621158 - 0.2760509009029649j


@pytest.mark.parametrize("backend", ["exact_piecewise", "stepped"])
def test_bloch_relaxation_oracle(backend):
    omega0 = 2 * math.pi * 3e3
    theta = math.pi / 3
    h = omega0 * SZ2
    channels = q.relaxation_channels(SX2, SY2, SZ2, t1=2e-3, t2=1e-3)
    gen = q.liouvillian(h, channels)
    rho = q.pure_state(np.array([math.cos(theta / 2), math.sin(theta / 2)]), (2,))
    out = q.evolve(rho, gen, 0.4e-3, q.EvolutionOptions(backend=backend, tolerance=1e-8))
    tol = 1e-10 if backend == "exact_piecewise" else 1e-6
    sz = float(np.real(np.trace(out.matrix @ PAULI_Z)))
    assert sz == pytest.approx(BLOCH_SZ, abs=tol)
    assert out.matrix[0, 1] == pytest.approx(BLOCH_C01, abs=tol)


def test_t2_equals_2t1_edge():
    # at T2 = 2 T1 transverse decay comes from the flip channels alone;
    # frozen ratio exp(-0.9/2) = 0.6376281516217733
    channels = q.relaxation_channels(SX2, SY2, SZ2, t1=1e-3, t2=2e-3)
    assert len(channels) == 2  # no dephasing channel needed
    gen = q.liouvillian(np.zeros((2, 2)), channels)
    rho = q.pure_state(np.array([1.0, 1.0]), (2,))
    out = q.evolve(rho, gen, 0.9e-3)
    assert out.matrix[0, 1].real == pytest.approx(0.5 * 0.6376281516217733, abs=1e-12)


def test_relaxation_rejects_t2_above_2t1():
    with pytest.raises(ValueError):
        q.relaxation_channels(SX2, SY2, SZ2, t1=1e-3, t2=2.1e-3)


def test_infinite_t1_gives_pure_dephasing_only():
    channels = q.relaxation_channels(SX2, SY2, SZ2, t1=math.inf, t2=1e-3)
    assert len(channels) == 1
    gen = q.liouvillian(np.zeros((2, 2)), channels)
    rho = q.pure_state(np.array([1.0, 1.0]), (2,))
    out = q.evolve(rho, gen, 1e-3)
    # off-diagonal decays exp(-1); populations untouched
    assert out.matrix[0, 1].real == pytest.approx(0.5 * math.exp(-1.0), abs=1e-12)
    assert out.matrix[0, 0].real == pytest.approx(0.5, abs=1e-12)


def test_no_channels_for_infinite_times():
    assert q.relaxation_channels(SX2, SY2, SZ2, math.inf, math.inf) == []


def test_stepped_matches_exact_random_generator():
    rng = np.random.default_rng(23)
    h = random_hermitian(rng, 3, scale=2 * math.pi * 1e4)
    jump = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    gen = q.liouvillian(h, [q.LindbladChannel(jump, 500.0)])
    rho = random_density(rng, (3,))
    exact = q.evolve(rho, gen, 2e-4)
    stepped = q.evolve(rho, gen, 2e-4, q.EvolutionOptions(backend="stepped", tolerance=1e-8))
    assert q.trace_distance(exact, stepped) < 1e-7


def test_time_dependent_commuting_drive_oracle():
    # H(t) = cos(w t) (Omega/2) sigma_x commutes with itself at all times, so
    # P_1(t) = sin^2(phi/2) with phi = Omega sin(w t) / w. Frozen at
    # Omega/2pi = 5 kHz, w/2pi = 20 kHz, t = 130 us: P_1 = 0.005388597822570046
    w = 2 * math.pi * 20e3
    omega = 2 * math.pi * 5e3
    part = q.liouvillian(omega * SX2)
    gen = q.TimeDependentGenerator(
        static=q.Superoperator(2, np.zeros((4, 4), dtype=complex)),
        parts=((lambda t: math.cos(w * t), part),),
        frequency_scale=w,
    )
    rho = q.pure_state(np.array([1.0, 0.0]), (2,))
    out = q.evolve(rho, gen, 1.3e-4, q.EvolutionOptions(backend="stepped", tolerance=1e-8))
    assert out.matrix[1, 1].real == pytest.approx(0.005388597822570046, abs=1e-8)


def test_time_dependent_phase_origin():
    # same drive entered via t0 offset: cos(w(t+t0)) tracked from absolute time
    w = 2 * math.pi * 20e3
    omega = 2 * math.pi * 5e3
    part = q.liouvillian(omega * SX2)
    gen = q.TimeDependentGenerator(
        static=q.Superoperator(2, np.zeros((4, 4), dtype=complex)),
        parts=((lambda t: math.cos(w * t), part),),
        frequency_scale=w,
    )
    rho = q.pure_state(np.array([1.0, 0.0]), (2,))
    opts = q.EvolutionOptions(backend="stepped", tolerance=1e-8)
    half = q.evolve(rho, gen, 0.65e-4, opts)
    full_split = q.evolve(half, gen, 0.65e-4, opts, t0=0.65e-4)
    full = q.evolve(rho, gen, 1.3e-4, opts)
    assert q.trace_distance(full_split, full) < 1e-8


def test_evolve_rejects_negative_duration():
    gen = q.liouvillian(SZ2)
    with pytest.raises(q.EvolutionError):
        q.evolve(q.maximally_mixed((2,)), gen, -1.0)


def test_evolve_zero_duration_is_identity():
    gen = q.liouvillian(SZ2)
    rho = q.maximally_mixed((2,))
    assert q.evolve(rho, gen, 0.0) is rho


def test_exact_backend_rejects_time_dependence():
    gen = q.TimeDependentGenerator(static=q.liouvillian(SZ2))
    with pytest.raises(q.EvolutionError):
        q.evolve(q.maximally_mixed((2,)), gen, 1e-6)


def test_evolve_rejects_dimension_mismatch():
    gen = q.liouvillian(SZ2)
    with pytest.raises(q.DimensionError):
        q.evolve(q.maximally_mixed((3,)), gen, 1e-6)


def test_step_underflow_raises():
    gen = q.liouvillian(2 * math.pi * 1e9 * SZ2)
    with pytest.raises(q.EvolutionError, match="underflow"):
        q.evolve(q.maximally_mixed((2,)), gen, 100.0,
                 q.EvolutionOptions(backend="stepped"))


def test_evolution_options_validation():
    with pytest.raises(ValueError):
        q.EvolutionOptions(backend="magic")
    with pytest.raises(ValueError):
        q.EvolutionOptions(max_step=0.0)
    with pytest.raises(ValueError):
        q.EvolutionOptions(tolerance=1e-2)


def test_trace_distance_known_values():
    a = q.pure_state(np.array([1.0, 0.0]), (2,))
    b = q.pure_state(np.array([0.0, 1.0]), (2,))
    assert q.trace_distance(a, b) == pytest.approx(1.0, abs=1e-12)
    c = q.DensityMatrix(np.diag([0.7, 0.3]).astype(complex), (2,))
    d = q.DensityMatrix(np.diag([0.4, 0.6]).astype(complex), (2,))
    assert q.trace_distance(c, d) == pytest.approx(0.3, abs=1e-12)
    assert q.trace_distance(a, a) == pytest.approx(0.0, abs=1e-12)


# --------------------------------------------------------------- properties


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(2, 4))
def test_evolution_preserves_state_invariants(seed, dim):
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, dim, scale=2 * math.pi * 1e4)
    jump = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    gen = q.liouvillian(h, [q.LindbladChannel(jump, float(rng.uniform(0, 2e3)))])
    rho = random_density(rng, (dim,))
    out = q.evolve(rho, gen, float(rng.uniform(0, 5e-4)))
    assert abs(np.trace(out.matrix) - 1) < 1e-9
    assert q.hermiticity_defect(out.matrix) < 1e-10
    assert float(np.linalg.eigvalsh(out.matrix).min()) > -1e-9


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_partial_trace_composition(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, (2, 2, 2))
    direct = q.partial_trace(rho, [0])
    staged = q.partial_trace(q.partial_trace(rho, [0, 2]), [0])
    assert np.allclose(direct.matrix, staged.matrix, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_matexp_antihermitian_is_unitary(seed):
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, 3)
    u = q.matexp(-1j * h)
    assert np.allclose(u @ u.conj().T, np.eye(3), atol=1e-10)
