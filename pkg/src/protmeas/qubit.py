"""Single-qubit stationary-basis experiment.

An unknown qubit state (Bloch vector s) sits in an unknown field
H = omega e.sigma. Three pointers coupled to sigma_x, sigma_y, sigma_z are
shifted by <sigma>_(+/-) = +/- e, so one joint readout lands near +e or -e
with probability (1 +/- e.s)/2. The sign and omega stay unknown.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .channel import (
    DEFAULT_KAPPA,
    IdealChannel,
    ReadoutSample,
    make_ideal_channel,
    sample_readouts,
)
from .detectors import make_detector_bank
from .errors import (
    AmbiguousBranch,
    BlochVectorTooLong,
    DegenerateSampleCloud,
    DomainError,
    NonUnitAxis,
)
from .quantum import HermitianOperator, SystemState

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])
IDENTITY = np.eye(2, dtype=complex)

DEFAULT_DELTA = 0.05
MAX_DELTA = 0.2
# ascending eigenvalue order puts -omega first
MINUS, PLUS = 0, 1
BRANCH_LABELS = {MINUS: "-", PLUS: "+"}


def pauli_dot(v) -> np.ndarray:
    return np.einsum("a,aij->ij", np.asarray(v, dtype=float), PAULI)


def pauli_observables() -> list[HermitianOperator]:
    return [HermitianOperator(s) for s in PAULI]


@dataclass(frozen=True)
class BlochState:
    s: tuple[float, float, float]

    def __post_init__(self):
        s = tuple(float(c) for c in self.s)
        if len(s) != 3:
            raise DomainError("Bloch vector needs 3 components")
        if np.linalg.norm(s) > 1 + 1e-12:
            raise BlochVectorTooLong(f"|s| = {np.linalg.norm(s):.6g} > 1")
        object.__setattr__(self, "s", s)


@dataclass(frozen=True)
class FieldConfig:
    omega: float
    e: tuple[float, float, float]

    def __post_init__(self):
        e = tuple(float(c) for c in self.e)
        if len(e) != 3:
            raise DomainError("field axis needs 3 components")
        if not self.omega > 0:
            raise DomainError(f"field strength must be > 0, got {self.omega}")
        if abs(np.linalg.norm(e) - 1) > 1e-12:
            raise NonUnitAxis(f"|e| = {np.linalg.norm(e):.17g}")
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "e", e)

    @property
    def axis(self) -> np.ndarray:
        return np.array(self.e)


def make_qubit_state(b: BlochState) -> SystemState:
    return SystemState.mixed(0.5 * (IDENTITY + pauli_dot(b.s)))


def make_field_hamiltonian(f: FieldConfig) -> HermitianOperator:
    return HermitianOperator(f.omega * pauli_dot(f.e))


def field_projector(f: FieldConfig, sign: int) -> np.ndarray:
    """(1 +/- e.sigma)/2 for sign = +1 / -1."""
    return 0.5 * (IDENTITY + sign * pauli_dot(f.e))


def make_qubit_channel(f: FieldConfig, deltas: Sequence[float] = (DEFAULT_DELTA,) * 3) -> IdealChannel:
    bank = make_detector_bank(deltas, labels=["x1", "x2", "x3"])
    return make_ideal_channel(make_field_hamiltonian(f), pauli_observables(), bank)


def branch_sign(index: Optional[int]) -> int:
    if index is None:
        raise AmbiguousBranch("readout did not single out a stationary state")
    return +1 if index == PLUS else -1


@dataclass(frozen=True)
class AxisEstimate:
    e_hat: np.ndarray
    n_samples: int
    angular_error: Optional[float] = None

    @property
    def angular_error_deg(self) -> Optional[float]:
        return None if self.angular_error is None else float(np.degrees(self.angular_error))


def axis_angle(u, v) -> float:
    """Angle between the lines spanned by u and v (sign ignored)."""
    u = np.asarray(u, float) / np.linalg.norm(u)
    v = np.asarray(v, float) / np.linalg.norm(v)
    return float(np.arctan2(np.linalg.norm(np.cross(u, v)), abs(u @ v)))


def _sign_fix(v):
    nz = np.flatnonzero(np.abs(v) > 1e-15)
    return -v if nz.size and v[nz[0]] < 0 else v


def estimate_axis(samples, truth=None) -> AxisEstimate:
    """Unit principal eigenvector of the scatter matrix sum_i x_i x_i^T.

    The first nonzero component of the result is made positive, so the
    estimate does not depend on the sign of any sample.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise DomainError("need at least 2 samples of shape (n, 3)")
    scatter = x.T @ x
    w, v = np.linalg.eigh(scatter)
    if w[-1] - w[-2] <= 1e-9 * max(w[-1], 1.0):
        raise DegenerateSampleCloud("top two scatter eigenvalues coincide")
    e_hat = _sign_fix(v[:, -1] / np.linalg.norm(v[:, -1]))
    err = None if truth is None else axis_angle(e_hat, truth)
    return AxisEstimate(e_hat, x.shape[0], err)


def one_shot_axis(x, truth=None) -> AxisEstimate:
    """The readout itself, normalized; keeps the sign of the observed branch."""
    x = np.asarray(x, dtype=float)
    e_hat = x / np.linalg.norm(x)
    return AxisEstimate(e_hat, 1, None if truth is None else axis_angle(e_hat, truth))


def _check_deltas(deltas):
    deltas = [float(d) for d in deltas]
    if len(deltas) != 3 or not all(0 < d <= MAX_DELTA for d in deltas):
        raise DomainError(f"qubit protocol needs three dispersions in (0, {MAX_DELTA}]")
    return deltas


def run_qubit_protocol(
    b: BlochState,
    f: FieldConfig,
    deltas: Sequence[float] = (DEFAULT_DELTA,) * 3,
    seed: int = 0,
    kappa: float = DEFAULT_KAPPA,
) -> tuple[ReadoutSample, AxisEstimate]:
    sample = run_qubit_campaign(b, f, deltas, [seed], kappa)[0]
    return sample, one_shot_axis(sample.x, f.axis)


def run_qubit_campaign(
    b: BlochState,
    f: FieldConfig,
    deltas: Sequence[float],
    seeds: Sequence[int],
    kappa: float = DEFAULT_KAPPA,
) -> list[ReadoutSample]:
    """One protocol run per seed on fresh copies of the same unknown qubit."""
    channel = make_qubit_channel(f, _check_deltas(deltas))
    return sample_readouts(channel, make_qubit_state(b), seeds, kappa)


def post_measurement_state(branch, f: FieldConfig) -> SystemState:
    """Collapsed state (1 +/- e.sigma)/2 for branch '+' / '-'.

    ``branch`` may be '+', '-', +1, -1, or a classified eigen-index (0 = '-',
    1 = '+'); None is ambiguous.
    """
    if branch is None:
        raise AmbiguousBranch("cannot collapse on an ambiguous readout")
    if branch in ("+", PLUS):
        sign = 1
    elif branch in ("-", -1, MINUS):
        sign = -1
    else:
        raise DomainError(f"unknown branch {branch!r}")
    return SystemState.mixed(field_projector(f, sign))
