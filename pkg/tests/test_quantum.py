import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import SX, SY, SZ
from protmeas.errors import DegenerateSpectrum, DimensionMismatch, InvalidState, NotHermitian
from protmeas.io import decode_matrix, decode_vector, encode_matrix, encode_vector
from protmeas.quantum import (
    HermitianOperator,
    SystemState,
    fix_phases,
    random_hermitian,
    random_unitary,
    spectral_decompose,
    stationary_expectations,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=2, max_value=6)


def test_sigma_z_decomposition():
    sd = spectral_decompose(HermitianOperator(SZ))
    np.testing.assert_allclose(sd.eigenvalues, [-1, 1])
    np.testing.assert_allclose(sd.eigenvectors, [[0, 1], [1, 0]], atol=1e-15)
    assert sd.min_gap == pytest.approx(2.0)


def test_field_along_z_has_eigenvalues_plus_minus_omega():
    sd = spectral_decompose(HermitianOperator(2.0 * SZ))
    np.testing.assert_allclose(sd.eigenvalues, [-2, 2])


def test_random_hermitian_reconstruction(rng):
    h = random_hermitian(4, rng)
    sd = spectral_decompose(h)
    v, w = sd.eigenvectors, sd.eigenvalues
    # independent reassembly: sum of rank-one projectors, explicit loop
    rebuilt = np.zeros((4, 4), dtype=complex)
    for n in range(4):
        rebuilt += w[n] * np.outer(v[:, n], v[:, n].conj())
    assert np.linalg.norm(rebuilt - h.matrix) <= 1e-9
    assert np.all(np.diff(w) > 0)


def test_phase_convention_largest_entry_real_positive(rng):
    sd = spectral_decompose(random_hermitian(5, rng))
    for col in sd.eigenvectors.T:
        k = np.argmax(np.abs(col))
        assert abs(col[k].imag) < 1e-15 and col[k].real > 0


def test_phase_convention_is_deterministic_under_rephasing(rng):
    v = random_unitary(3, rng)
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, 3))
    np.testing.assert_allclose(fix_phases(v * phases), fix_phases(v), atol=1e-14)


def test_degenerate_spectrum_refused():
    with pytest.raises(DegenerateSpectrum):
        spectral_decompose(HermitianOperator(np.diag([1.0, 1.0, 2.0])))
    with pytest.raises(DegenerateSpectrum):
        spectral_decompose(HermitianOperator(np.eye(2)))
    with pytest.raises(DegenerateSpectrum):
        spectral_decompose(HermitianOperator(np.diag([0.0, 1e-10, 1.0])))


def test_dimension_one_refused():
    with pytest.raises(DimensionMismatch):
        spectral_decompose(HermitianOperator([[1.0]]))


def test_non_hermitian_rejected():
    with pytest.raises(NotHermitian):
        HermitianOperator([[0, 1], [0, 0]])


def test_pauli_shifts_are_plus_minus_e():
    sd = spectral_decompose(HermitianOperator(SZ))
    table = stationary_expectations([HermitianOperator(s) for s in (SX, SY, SZ)], sd)
    # ascending order: row 0 is the "-" state
    np.testing.assert_allclose(table.shifts, [[0, 0, -1], [0, 0, 1]], atol=1e-15)


def test_identity_observable_shifts_are_one(rng):
    sd = spectral_decompose(random_hermitian(3, rng))
    table = stationary_expectations([HermitianOperator(np.eye(3))], sd)
    np.testing.assert_allclose(table.shifts[:, 0], 1.0, atol=1e-12)


def test_commuting_diagonal_pair():
    sd = spectral_decompose(HermitianOperator(np.diag([0.0, 1.0, 2.0])))
    table = stationary_expectations([HermitianOperator(np.diag([5.0, 6.0, 7.0]))], sd)
    np.testing.assert_allclose(table.shifts[:, 0], [5, 6, 7])
    off = table.matrices[0] - np.diag(np.diag(table.matrices[0]))
    assert np.abs(off).max() == 0


def test_expectations_dimension_mismatch():
    sd = spectral_decompose(HermitianOperator(SZ))
    with pytest.raises(DimensionMismatch):
        stationary_expectations([HermitianOperator(np.eye(3))], sd)


@given(seeds, dims)
def test_eigenvector_matrix_unitary(seed, d):
    sd = spectral_decompose(random_hermitian(d, np.random.default_rng(seed)))
    v = sd.eigenvectors
    assert np.abs(v.conj().T @ v - np.eye(d)).max() <= 1e-9
    assert np.linalg.norm(sd.reconstruct() - sd.reconstruct().conj().T) <= 1e-9


@given(seeds, dims)
def test_basis_covariance(seed, d):
    rng = np.random.default_rng(seed)
    h = random_hermitian(d, rng)
    obs = [random_hermitian(d, rng) for _ in range(2)]
    w = random_unitary(d, rng)
    t1 = stationary_expectations(obs, spectral_decompose(h))
    t2 = stationary_expectations([a.conjugated(w) for a in obs], spectral_decompose(h.conjugated(w)))
    np.testing.assert_allclose(t1.shifts, t2.shifts, atol=1e-9)


@given(seeds, dims)
def test_expectation_tables_hermitian(seed, d):
    rng = np.random.default_rng(seed)
    table = stationary_expectations(
        [random_hermitian(d, rng) for _ in range(3)], spectral_decompose(random_hermitian(d, rng))
    )
    m = table.matrices
    assert np.abs(m - m.conj().transpose(0, 2, 1)).max() <= 1e-10
    assert np.abs(np.diagonal(m, axis1=1, axis2=2).imag).max() <= 1e-12


def test_pure_state_requires_normalization():
    SystemState.pure([1, 0])
    with pytest.raises(InvalidState):
        SystemState.pure([1, 1])


@pytest.mark.parametrize(
    "rho",
    [
        [[0.5, 0.1], [0.2, 0.5]],  # not Hermitian
        [[0.6, 0], [0, 0.6]],  # trace
        [[1.2, 0], [0, -0.2]],  # negative eigenvalue
    ],
)
def test_mixed_state_invariants_enforced(rho):
    with pytest.raises(InvalidState):
        SystemState.mixed(rho)


def test_density_matrix_conversion_is_explicit():
    psi = np.array([1, 1j]) / np.sqrt(2)
    st_ = SystemState.pure(psi)
    assert st_.kind == "pure" and st_.data.ndim == 1
    rho = st_.density_matrix()
    np.testing.assert_allclose(rho, [[0.5, -0.5j], [0.5j, 0.5]])
    SystemState.mixed(rho)


def test_states_are_immutable():
    st_ = SystemState.pure([1, 0])
    with pytest.raises(ValueError):
        st_.data[0] = 0


@given(seeds, dims)
def test_matrix_json_round_trip(seed, d):
    m = random_hermitian(d, np.random.default_rng(seed)).matrix
    np.testing.assert_array_equal(decode_matrix(encode_matrix(m)), m)
    v = m[0]
    np.testing.assert_array_equal(decode_vector(encode_vector(v)), v)


def test_matrix_json_layout():
    assert encode_matrix([[1, 2j], [-2j, 3]]) == [[[1.0, 0.0], [0.0, 2.0]], [[0.0, -2.0], [3.0, 0.0]]]
    with pytest.raises(DimensionMismatch):
        decode_matrix([[[1, 0], [0, 0]]])
