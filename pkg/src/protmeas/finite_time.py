"""Finite-duration protective coupling, conditioned on detector momenta.

The detector momenta commute with the whole coupling, so the joint
propagator is block diagonal in p and it is enough to compute the system
unitary U_T(p) node by node on a momentum grid.

U_T(p) is the time-ordered midpoint product

    prod_k exp(-i dt sum_a p_a A_a(t_k) / T),   t_k = (k + 1/2) dt,

with later slices on the left and A(t) = exp(itH) A exp(-itH). Every slice is
the same matrix E = exp(-i dt K) (K = sum_a p_a A_a / T) conjugated by free
evolution, so the product collapses to

    exp(iH t_last) E (exp(-iH dt) E)^(steps - 1) exp(-iH t_0)

and the power is taken through the eigenphases of W - 1 with
W = exp(-iH dt) E. The cost does not depend on ``steps`` and the rounding
error does not grow with it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .detectors import MomentumGrid
from .errors import DegenerateSpectrum, DimensionMismatch, DomainError
from .quantum import DEGENERACY_RTOL, HermitianOperator, SpectralDecomposition

# midpoint error is relative O((gap * dt)^2 / 24)
MAX_PHASE_STEP = 3e-4
SLICES_PER_PERIOD = 10
CHUNK = 4096


def default_steps(duration: float, basis: SpectralDecomposition) -> int:
    fastest = basis.max_gap
    return max(
        1,
        math.ceil(SLICES_PER_PERIOD * duration * fastest / (2 * math.pi)),
        math.ceil(duration * fastest / MAX_PHASE_STEP),
    )


@dataclass(frozen=True)
class FiniteTimeConfig:
    duration: float
    observables: Sequence[HermitianOperator]
    hamiltonian: SpectralDecomposition
    steps: int | None = None
    matrices: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not (np.isfinite(self.duration) and self.duration > 0):
            raise DomainError(f"duration must be > 0, got {self.duration}")
        obs = tuple(self.observables)
        if not obs:
            raise DimensionMismatch("need at least one observable")
        for a in obs:
            if a.dimension != self.hamiltonian.dimension:
                raise DimensionMismatch("observable and Hamiltonian dimensions differ")
        steps = default_steps(self.duration, self.hamiltonian) if self.steps is None else int(self.steps)
        if steps < 1:
            raise DomainError("steps must be >= 1")
        m = np.stack([self.hamiltonian.to_eigenbasis(a) for a in obs])
        m.setflags(write=False)
        object.__setattr__(self, "observables", obs)
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "matrices", m)

    @property
    def dimension(self) -> int:
        return self.hamiltonian.dimension

    def with_duration(self, duration: float, steps: int | None = None) -> FiniteTimeConfig:
        return FiniteTimeConfig(duration, self.observables, self.hamiltonian, steps)


def _herm_expm1(h, scale):
    """exp(-i scale h) - 1 for a stack of Hermitian matrices, without cancellation."""
    lam, v = np.linalg.eigh(h)
    return (v * np.expm1(-1j * scale * lam)[..., None, :]) @ v.conj().swapaxes(-1, -2)


def _sliced_products(momenta: np.ndarray, cfg: FiniteTimeConfig) -> np.ndarray:
    """U_T(p) in the eigenbasis for a stack of momenta (M, N) -> (M, d, d)."""
    d = cfg.dimension
    T, steps = cfg.duration, cfg.steps
    dt = T / steps
    omega = cfg.hamiltonian.eigenvalues - cfg.hamiltonian.eigenvalues.mean()
    coupling = np.einsum("ma,anl->mnl", momenta, cfg.matrices) / T
    coupling = 0.5 * (coupling + coupling.conj().swapaxes(-1, -2))
    y = _herm_expm1(coupling, dt)
    x = np.expm1(-1j * omega * dt)
    # z = W - 1 = x + y + x y with x diagonal
    z = y + x[:, None] * y
    z[..., np.arange(d), np.arange(d)] += x
    # W = 1 + z is unitary, so z is normal and shares eigenvectors with its
    # anti-Hermitian part; for small slices those phases are distinct
    c = (z - z.conj().swapaxes(-1, -2)) / 2j
    _, q = np.linalg.eigh(c)
    mu = np.einsum("mia,mij,mja->ma", q.conj(), z, q)
    theta = np.angle(1.0 + mu)
    w_pow = (q * np.exp(1j * (steps - 1) * theta)[..., None, :]) @ q.conj().swapaxes(-1, -2)
    e = y.copy()
    e[..., np.arange(d), np.arange(d)] += 1.0
    left = np.exp(1j * omega * (T - dt / 2))
    right = np.exp(-1j * omega * (dt / 2))
    return left[:, None] * (e @ w_pow) * right[None, :]


def _as_momenta(p, n_obs):
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if p.shape[-1] != n_obs:
        raise DimensionMismatch(f"momentum has {p.shape[-1]} components, need {n_obs}")
    if not np.all(np.isfinite(p)):
        raise DomainError("momentum must be finite")
    return p


def conditional_unitary(p, cfg: FiniteTimeConfig) -> np.ndarray:
    """System unitary U_T(p) for fixed detector momenta, in the original basis."""
    p = _as_momenta(p, len(cfg.observables))
    u = _sliced_products(p[None, :], cfg)[0]
    return cfg.hamiltonian.from_eigenbasis(u)


def _ideal_diagonal(momenta, shifts):
    return np.exp(-1j * momenta @ np.asarray(shifts).T)


def ideal_conditional_unitary(p, shifts, basis: SpectralDecomposition) -> np.ndarray:
    """sum_n exp(-i p . shift_n) |n><n| in the original basis."""
    shifts = np.asarray(shifts, dtype=float)
    p = _as_momenta(p, shifts.shape[1])
    if shifts.shape[0] != basis.dimension:
        raise DimensionMismatch("one shift vector per eigenstate")
    return basis.from_eigenbasis(np.diag(_ideal_diagonal(p, shifts)))


def node_distances(momenta, cfg: FiniteTimeConfig, shifts=None) -> np.ndarray:
    """||U_T(p) - U_inf(p)||_F^2 for each row of ``momenta``."""
    momenta = _as_momenta(momenta, len(cfg.observables))
    momenta = np.atleast_2d(momenta)
    if shifts is None:
        shifts = np.diagonal(cfg.matrices, axis1=1, axis2=2).real.T
    d = cfg.dimension
    out = np.empty(len(momenta))
    for start in range(0, len(momenta), CHUNK):
        block = momenta[start : start + CHUNK]
        diff = _sliced_products(block, cfg)
        diff[..., np.arange(d), np.arange(d)] -= _ideal_diagonal(block, shifts)
        out[start : start + CHUNK] = np.sum(np.abs(diff) ** 2, axis=(1, 2))
    return out


def channel_distance(
    cfg: FiniteTimeConfig,
    grid: MomentumGrid,
    shifts=None,
    basis: SpectralDecomposition | None = None,
) -> float:
    """Momentum-averaged squared Frobenius distance between U_T and U_inf.

    ``shifts`` default to the diagonal of the observables in ``cfg``'s
    eigenbasis; a different ``basis`` is rejected since both unitaries must be
    diagonalised by the same stationary states.
    """
    if basis is not None and not np.allclose(basis.eigenvectors, cfg.hamiltonian.eigenvectors):
        raise DimensionMismatch("basis differs from the configuration's Hamiltonian basis")
    if len(grid.nodes) != len(cfg.observables):
        raise DimensionMismatch("grid needs one axis per observable")
    momenta, weights = grid.joint()
    return float(np.sum(weights * node_distances(momenta, cfg, shifts)))


def time_averaged_offdiagonals(cfg: FiniteTimeConfig) -> np.ndarray:
    """Time average over [0, T] of <n|A_a(t)|m> for n != m, closed form.

    Returns an (N, d, d) array with zero diagonal.
    """
    basis = cfg.hamiltonian
    if basis.min_gap <= DEGENERACY_RTOL * basis.max_gap:
        raise DegenerateSpectrum("Bohr frequency below tolerance")
    w = basis.eigenvalues
    phase = (w[:, None] - w[None, :]) * cfg.duration
    # (e^{ix} - 1) / (ix) = e^{ix/2} sin(x/2) / (x/2)
    factor = np.exp(0.5j * phase) * np.sinc(phase / (2 * np.pi))
    avg = cfg.matrices * factor
    d = cfg.dimension
    avg[:, np.arange(d), np.arange(d)] = 0.0
    return avg


def suppression_bound(cfg: FiniteTimeConfig) -> np.ndarray:
    """2 |<n|A|m>| / (T |w_n - w_m|) for n != m, zero on the diagonal."""
    w = cfg.hamiltonian.eigenvalues
    gap = np.abs(w[:, None] - w[None, :])
    np.fill_diagonal(gap, np.inf)
    return 2 * np.abs(cfg.matrices) / (cfg.duration * gap)


@dataclass(frozen=True)
class ConvergenceCurve:
    durations: np.ndarray
    distances: np.ndarray
    envelope: np.ndarray
    envelope_slope: float

    def to_rows(self):
        return zip(self.durations.tolist(), self.distances.tolist(), self.envelope.tolist())


def fit_loglog_slope(t, y) -> float:
    t, y = np.asarray(t, dtype=float), np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise DomainError("log-log fit needs positive values")
    return float(np.polyfit(np.log(t), np.log(y), 1)[0])


def geometric_durations(t_min: float, t_max: float, points_per_decade: int) -> np.ndarray:
    if not 0 < t_min < t_max:
        raise DomainError("need 0 < t_min < t_max")
    if points_per_decade < 1:
        raise DomainError("points_per_decade must be >= 1")
    n = int(round(np.log10(t_max / t_min) * points_per_decade)) + 1
    return np.geomspace(t_min, t_max, max(n, 2))


def convergence_sweep(
    cfg: FiniteTimeConfig,
    grid: MomentumGrid,
    durations: Sequence[float],
    phase_samples: int = 8,
) -> ConvergenceCurve:
    """D(T) over ``durations`` plus its upper envelope and log-log slope.

    D oscillates at the Bohr frequencies; the envelope at T is the largest D
    over ``phase_samples`` evenly spaced durations spanning one period of the
    slowest Bohr frequency, starting at T. Step counts follow the default rule.
    """
    durations = np.asarray(durations, dtype=float)
    if np.any(np.diff(durations) <= 0):
        raise DomainError("durations must be strictly increasing")
    period = 2 * np.pi / cfg.hamiltonian.min_gap
    momenta, weights = grid.joint()

    def dist(t):
        return float(np.sum(weights * node_distances(momenta, cfg.with_duration(t))))

    distances = np.array([dist(t) for t in durations])
    envelope = np.array(
        [
            max([d0] + [dist(t + j * period / phase_samples) for j in range(1, phase_samples)])
            for t, d0 in zip(durations, distances)
        ]
    )
    slope = fit_loglog_slope(durations, envelope) if np.all(envelope > 0) else float("nan")
    return ConvergenceCurve(durations, distances, envelope, slope)
