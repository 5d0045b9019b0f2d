"""Dense linear algebra for small Hilbert spaces.

States, Hermitian operators, the stationary eigenbasis of a Hamiltonian and
the table of observable matrix elements in that basis. Everything here is an
immutable value; arrays handed out are read-only views.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateSpectrum, DimensionMismatch, InvalidState, NotHermitian

HERMITIAN_TOL = 1e-10
STATE_TOL = 1e-10
# relative to the spectral range
DEGENERACY_RTOL = 1e-8
MAX_DIMENSION = 64


def _frozen(a, dtype=complex):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def _check_hermitian(m, tol=HERMITIAN_TOL):
    return np.max(np.abs(m - m.conj().T), initial=0.0) <= tol


@dataclass(frozen=True)
class HermitianOperator:
    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"operator must be square, got shape {m.shape}")
        if not 1 <= m.shape[0] <= MAX_DIMENSION:
            raise DimensionMismatch(f"dimension {m.shape[0]} outside 1..{MAX_DIMENSION}")
        if not _check_hermitian(m):
            raise NotHermitian("matrix differs from its conjugate transpose")
        object.__setattr__(self, "matrix", m)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def conjugated(self, w) -> HermitianOperator:
        """Return W A W^dagger for a unitary ``w``."""
        w = np.asarray(w, dtype=complex)
        m = w @ self.matrix @ w.conj().T
        return HermitianOperator(0.5 * (m + m.conj().T))


@dataclass(frozen=True)
class SystemState:
    """Pure state vector or density matrix of a d-level system.

    Use :meth:`pure` / :meth:`mixed` to build one. Converting a pure state to
    a density matrix is always explicit via :meth:`density_matrix`.
    """

    kind: str
    data: np.ndarray

    def __post_init__(self):
        data = _frozen(self.data)
        if self.kind == "pure":
            if data.ndim != 1:
                raise DimensionMismatch("pure state needs a vector")
            if abs(np.vdot(data, data).real - 1.0) > STATE_TOL:
                raise InvalidState("state vector is not normalized")
        elif self.kind == "mixed":
            if data.ndim != 2 or data.shape[0] != data.shape[1]:
                raise DimensionMismatch("density matrix must be square")
            if not _check_hermitian(data, STATE_TOL):
                raise InvalidState("density matrix is not Hermitian")
            if abs(np.trace(data).real - 1.0) > STATE_TOL:
                raise InvalidState("density matrix trace differs from 1")
            if np.linalg.eigvalsh(data).min() < -STATE_TOL:
                raise InvalidState("density matrix has a negative eigenvalue")
        else:
            raise InvalidState(f"unknown state kind {self.kind!r}")
        if not 1 <= data.shape[0] <= MAX_DIMENSION:
            raise DimensionMismatch(f"dimension {data.shape[0]} outside 1..{MAX_DIMENSION}")
        object.__setattr__(self, "data", data)

    @classmethod
    def pure(cls, amplitudes) -> SystemState:
        return cls("pure", amplitudes)

    @classmethod
    def mixed(cls, rho) -> SystemState:
        return cls("mixed", rho)

    @property
    def dimension(self) -> int:
        return self.data.shape[0]

    def density_matrix(self) -> np.ndarray:
        if self.kind == "pure":
            return np.outer(self.data, self.data.conj())
        return np.array(self.data)

    def populations(self, vectors) -> np.ndarray:
        """Diagonal <n|rho|n> in the orthonormal basis given as columns."""
        vectors = np.asarray(vectors)
        if vectors.shape[0] != self.dimension:
            raise DimensionMismatch(
                f"state has dimension {self.dimension}, basis {vectors.shape[0]}"
            )
        if self.kind == "pure":
            w = np.abs(vectors.conj().T @ self.data) ** 2
        else:
            w = np.einsum("in,ij,jn->n", vectors.conj(), self.data, vectors).real
        return np.clip(w, 0.0, None)


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    min_gap: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", _frozen(self.eigenvalues, float))
        object.__setattr__(self, "eigenvectors", _frozen(self.eigenvectors))
        gaps = np.abs(self.eigenvalues[:, None] - self.eigenvalues[None, :])
        off = ~np.eye(self.dimension, dtype=bool)
        object.__setattr__(self, "min_gap", float(gaps[off].min()) if off.any() else np.inf)

    @property
    def dimension(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def max_gap(self) -> float:
        return float(self.eigenvalues[-1] - self.eigenvalues[0])

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def to_eigenbasis(self, op) -> np.ndarray:
        m = op.matrix if isinstance(op, HermitianOperator) else np.asarray(op)
        v = self.eigenvectors
        return v.conj().T @ m @ v

    def from_eigenbasis(self, m) -> np.ndarray:
        v = self.eigenvectors
        return v @ m @ v.conj().T

    def with_eigenvalues(self, eigenvalues) -> SpectralDecomposition:
        """Same eigenvectors, different (distinct) energies."""
        eigenvalues = np.asarray(eigenvalues, dtype=float)
        if eigenvalues.shape != self.eigenvalues.shape:
            raise DimensionMismatch("eigenvalue count differs from dimension")
        return SpectralDecomposition(eigenvalues, self.eigenvectors)


def fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-modulus entry is real and positive.

    Ties in modulus go to the lowest row index.
    """
    vectors = np.array(vectors, dtype=complex)
    rows = np.argmax(np.abs(vectors), axis=0)
    pivots = vectors[rows, np.arange(vectors.shape[1])]
    return vectors * (np.abs(pivots) / pivots)[None, :]


def spectral_decompose(h: HermitianOperator) -> SpectralDecomposition:
    """Eigendecomposition with ascending eigenvalues and fixed phases.

    Raises DegenerateSpectrum when two eigenvalues are closer than
    ``DEGENERACY_RTOL`` times the spectral range.
    """
    if h.dimension < 2:
        raise DimensionMismatch("need dimension >= 2")
    w, v = np.linalg.eigh(h.matrix)
    spread = w[-1] - w[0]
    gap = np.min(np.diff(w))
    if spread <= 0 or gap <= DEGENERACY_RTOL * spread:
        raise DegenerateSpectrum(
            f"minimum eigenvalue gap {gap:.3g} vs spectral range {spread:.3g}"
        )
    return SpectralDecomposition(w, fix_phases(v))


@dataclass(frozen=True)
class ExpectationTable:
    """Matrix elements <n|A_alpha|m> of each observable in the eigenbasis.

    ``matrices`` has shape (N, d, d); ``shifts`` (d, N) holds the diagonal,
    one row of stationary expectation values per eigenstate.
    """

    matrices: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrices, dtype=complex)
        m = 0.5 * (m + m.conj().transpose(0, 2, 1))
        object.__setattr__(self, "matrices", _frozen(m))

    @property
    def n_observables(self) -> int:
        return self.matrices.shape[0]

    @property
    def dimension(self) -> int:
        return self.matrices.shape[1]

    @property
    def shifts(self) -> np.ndarray:
        s = np.diagonal(self.matrices, axis1=1, axis2=2).real.T.copy()
        s.setflags(write=False)
        return s


def stationary_expectations(
    observables: Sequence[HermitianOperator], basis: SpectralDecomposition
) -> ExpectationTable:
    if len(observables) == 0:
        raise DimensionMismatch("need at least one observable")
    for k, a in enumerate(observables):
        if a.dimension != basis.dimension:
            raise DimensionMismatch(
                f"observable {k} has dimension {a.dimension}, basis {basis.dimension}"
            )
    return ExpectationTable(np.stack([basis.to_eigenbasis(a) for a in observables]))


def random_hermitian(d: int, rng: np.random.Generator) -> HermitianOperator:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return HermitianOperator(0.5 * (g + g.conj().T))


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))
