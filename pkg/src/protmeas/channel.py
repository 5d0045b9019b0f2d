"""Ideal (infinite-duration) joint protective measurement.

In the stationary basis {|n>} the ideal coupling only keeps the diagonal
matrix elements, so every pointer alpha is displaced by <n|A_alpha|n> on the
branch |n>. The energies themselves never enter.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .detectors import DetectorBank, PointerDistribution
from .errors import DimensionMismatch, DomainError
from .quantum import (
    ExpectationTable,
    HermitianOperator,
    SpectralDecomposition,
    SystemState,
    spectral_decompose,
    stationary_expectations,
)

DEFAULT_KAPPA = 5.0
# mixture components lighter than this are dropped from the pointer density
PRUNE_TOL = 1e-14


@dataclass(frozen=True)
class ResolvabilityReport:
    """Pairwise pointer gaps and whether each detector separates them.

    ``gaps[n, m, a]`` is |<A_a>_n - <A_a>_m|; ``resolved[n, m, a]`` holds
    delta_x[a] <= gap / kappa (boundary inclusive).
    """

    kappa: float
    deltas: np.ndarray
    gaps: np.ndarray
    resolved: np.ndarray

    @property
    def pair_resolved(self) -> np.ndarray:
        pr = self.resolved.any(axis=-1)
        np.fill_diagonal(pr, True)
        return pr

    @property
    def all_pairs_resolved(self) -> bool:
        return bool(self.pair_resolved.all())

    @property
    def resolving_detectors(self) -> np.ndarray:
        """Detectors that separate at least one pair of eigenstates."""
        d = self.gaps.shape[0]
        off = ~np.eye(d, dtype=bool)
        return self.resolved[off].any(axis=0)

    def to_dict(self) -> dict:
        d = self.gaps.shape[0]
        pairs = []
        for n in range(d):
            for m in range(n + 1, d):
                pairs.append(
                    {
                        "pair": [n, m],
                        "gaps": self.gaps[n, m].tolist(),
                        "resolved": self.resolved[n, m].tolist(),
                        "pair_resolved": bool(self.pair_resolved[n, m]),
                    }
                )
        return {
            "kappa": self.kappa,
            "deltas": self.deltas.tolist(),
            "pairs": pairs,
            "all_pairs_resolved": self.all_pairs_resolved,
        }


def check_resolvability(
    table: ExpectationTable, bank: DetectorBank, kappa: float = DEFAULT_KAPPA
) -> ResolvabilityReport:
    if not kappa > 0:
        raise DomainError("kappa must be > 0")
    if table.n_observables != len(bank):
        raise DimensionMismatch(
            f"{table.n_observables} observables for {len(bank)} detectors"
        )
    s = table.shifts
    gaps = np.abs(s[:, None, :] - s[None, :, :])
    deltas = bank.deltas
    resolved = deltas <= gaps / kappa
    return ResolvabilityReport(float(kappa), deltas, gaps, resolved)


@dataclass(frozen=True)
class IdealChannel:
    basis: SpectralDecomposition
    table: ExpectationTable
    bank: DetectorBank

    def __post_init__(self):
        if self.table.dimension != self.basis.dimension:
            raise DimensionMismatch("expectation table and basis dimensions differ")
        if self.table.n_observables != len(self.bank):
            raise DimensionMismatch(
                f"{self.table.n_observables} observables for {len(self.bank)} detectors"
            )

    @property
    def shifts(self) -> np.ndarray:
        """(d, N) pointer displacement for each eigenstate."""
        return self.table.shifts

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    def branch_weights(self, state: SystemState) -> np.ndarray:
        if state.dimension != self.dimension:
            raise DimensionMismatch(
                f"state dimension {state.dimension}, channel {self.dimension}"
            )
        w = state.populations(self.basis.eigenvectors)
        return w / w.sum()

    def resolvability(self, kappa: float = DEFAULT_KAPPA) -> ResolvabilityReport:
        return check_resolvability(self.table, self.bank, kappa)


def make_ideal_channel(
    hamiltonian: HermitianOperator | SpectralDecomposition,
    observables: Sequence[HermitianOperator],
    bank: DetectorBank,
) -> IdealChannel:
    basis = (
        hamiltonian
        if isinstance(hamiltonian, SpectralDecomposition)
        else spectral_decompose(hamiltonian)
    )
    return IdealChannel(basis, stationary_expectations(observables, basis), bank)


def apply_ideal_channel(
    channel: IdealChannel, state: SystemState
) -> tuple[PointerDistribution, np.ndarray]:
    """Pointer density after the ideal channel, plus the branch weights <n|rho|n>.

    Components with weight below ``PRUNE_TOL`` are dropped from the mixture;
    the returned branch weights are never pruned.
    """
    w = channel.branch_weights(state)
    keep = w > PRUNE_TOL
    kept = w[keep] / w[keep].sum()
    dist = PointerDistribution(kept, channel.shifts[keep], channel.bank.deltas)
    return dist, w


@dataclass(frozen=True)
class ReadoutSample:
    """One pointer readout; ``collapsed_index`` is ground truth for tests."""

    x: np.ndarray
    seed: int
    collapsed_index: int
    classified: Optional[int]


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox stream keyed by a 64-bit seed."""
    if not 0 <= int(seed) < 2**64:
        raise DomainError(f"seed {seed} is not an unsigned 64-bit integer")
    return np.random.Generator(np.random.Philox(int(seed)))


def _draw(shifts, deltas, cumulative, rng):
    n = int(np.searchsorted(cumulative, rng.random(), side="right"))
    n = min(n, len(cumulative) - 1)
    x = shifts[n] + deltas * rng.standard_normal(len(deltas))
    return n, x


def sample_readout(
    channel: IdealChannel, state: SystemState, seed: int, kappa: float = DEFAULT_KAPPA
) -> ReadoutSample:
    """Draw a branch n with probability <n|rho|n>, then Gaussian pointer noise."""
    return sample_readouts(channel, state, [seed], kappa)[0]


def sample_readouts(
    channel: IdealChannel, state: SystemState, seeds: Sequence[int], kappa: float = DEFAULT_KAPPA
) -> list[ReadoutSample]:
    """One independent stream per seed, so batches can be split at will."""
    w = channel.branch_weights(state)
    cumulative = np.cumsum(w)
    cumulative /= cumulative[-1]
    shifts, deltas = channel.shifts, channel.bank.deltas
    classifier = _BoxClassifier(channel, kappa)
    out = []
    for seed in seeds:
        n, x = _draw(shifts, deltas, cumulative, make_rng(seed))
        out.append(ReadoutSample(x, int(seed), n, classifier(x)))
    return out


class _BoxClassifier:
    def __init__(self, channel: IdealChannel, kappa: float):
        report = channel.resolvability(kappa)
        self.axes = report.resolving_detectors
        self.shifts = channel.shifts[:, self.axes]
        self.half_widths = kappa * channel.bank.deltas[self.axes]

    def __call__(self, x) -> Optional[int]:
        x = np.asarray(x, dtype=float)[self.axes]
        inside = np.all(np.abs(self.shifts - x) <= self.half_widths, axis=1)
        hits = np.flatnonzero(inside)
        return int(hits[0]) if len(hits) == 1 else None


def classify_outcome(x, channel: IdealChannel, kappa: float = DEFAULT_KAPPA) -> Optional[int]:
    """Index of the unique eigenstate whose window contains ``x``, else None.

    Windows are boxes of half-width kappa * delta_x on every detector that
    separates some pair; other detectors are ignored. None means ambiguous.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (len(channel.bank),):
        raise DimensionMismatch(f"readout needs {len(channel.bank)} coordinates")
    return _BoxClassifier(channel, kappa)(x)
