"""Von Neumann detector bank with Gaussian pointers (hbar = 1).

Each pointer starts in a zero-mean minimum-uncertainty Gaussian, so its
momentum density is Gaussian with dispersion 1/(2 delta_x). The ideal channel
maps such pointers to Gaussian mixtures, kept here as a
:class:`PointerDistribution`.
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, DomainError, NonPositiveDispersion

WEIGHT_TOL = 1e-9


@dataclass(frozen=True)
class Detector:
    delta_x: float
    label: str

    def __post_init__(self):
        if not (np.isfinite(self.delta_x) and self.delta_x > 0):
            raise NonPositiveDispersion(f"{self.label}: delta_x = {self.delta_x}")

    @property
    def delta_p(self) -> float:
        return 1.0 / (2.0 * self.delta_x)

    def position_amplitude(self, x):
        """Real Gaussian wave function psi(x) with |psi|^2 of variance delta_x^2."""
        s = self.delta_x
        return (2 * np.pi * s**2) ** -0.25 * np.exp(-np.asarray(x) ** 2 / (4 * s**2))

    def momentum_density(self, p):
        return gaussian(p, 0.0, self.delta_p)


@dataclass(frozen=True)
class DetectorBank:
    detectors: tuple[Detector, ...]

    def __post_init__(self):
        object.__setattr__(self, "detectors", tuple(self.detectors))
        if not self.detectors:
            raise DomainError("detector bank needs at least one detector")
        labels = [d.label for d in self.detectors]
        if len(set(labels)) != len(labels):
            raise DomainError(f"detector labels not unique: {labels}")

    def __len__(self):
        return len(self.detectors)

    @property
    def deltas(self) -> np.ndarray:
        return np.array([d.delta_x for d in self.detectors])

    @property
    def labels(self) -> list[str]:
        return [d.label for d in self.detectors]


def make_detector_bank(deltas: Sequence[float], labels: Sequence[str] | None = None) -> DetectorBank:
    deltas = [float(x) for x in deltas]
    if labels is None:
        labels = [f"x{k + 1}" for k in range(len(deltas))]
    if len(labels) != len(deltas):
        raise DimensionMismatch("one label per detector")
    for dx, lab in zip(deltas, labels):
        if not dx > 0:
            raise NonPositiveDispersion(f"{lab}: delta_x = {dx} must be > 0")
    return DetectorBank(tuple(Detector(dx, lab) for dx, lab in zip(deltas, labels)))


def gaussian(x, mean, sigma):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * ((x - mean) / sigma) ** 2) / (np.sqrt(2 * np.pi) * sigma)


@dataclass(frozen=True)
class MomentumGrid:
    """Per-detector trapezoid nodes/weights for the pointer momentum density.

    ``weights[a][k]`` approximates |phi_a(p_k)|^2 dp; the joint grid over
    several detectors is the outer product, enumerated in C order.
    """

    nodes: tuple[np.ndarray, ...]
    weights: tuple[np.ndarray, ...]

    def joint(self) -> tuple[np.ndarray, np.ndarray]:
        """All joint nodes (M, N) and product weights (M,), C order."""
        p = np.stack([g.ravel() for g in np.meshgrid(*self.nodes, indexing="ij")], axis=1)
        w = functools.reduce(np.multiply.outer, self.weights).ravel()
        return p, w

    @property
    def size(self) -> int:
        return int(np.prod([len(n) for n in self.nodes]))


def build_momentum_grid(
    bank: DetectorBank, points_per_detector: int = 64, coverage_sigmas: float = 6.0
) -> MomentumGrid:
    if points_per_detector < 8:
        raise DomainError("points_per_detector must be >= 8")
    if coverage_sigmas < 3:
        raise DomainError("coverage_sigmas must be >= 3")
    nodes, weights = [], []
    for det in bank.detectors:
        pmax = coverage_sigmas * det.delta_p
        p = np.linspace(-pmax, pmax, points_per_detector)
        h = p[1] - p[0]
        trap = np.full(points_per_detector, h)
        trap[[0, -1]] = h / 2
        nodes.append(p)
        weights.append(trap * det.momentum_density(p))
    return MomentumGrid(tuple(nodes), tuple(weights))


@dataclass(frozen=True)
class PointerDistribution:
    """Gaussian mixture over joint pointer positions.

    P(x) = sum_i weights[i] * prod_a N(x_a; centers[i, a], deltas[a]^2)
    """

    weights: np.ndarray
    centers: np.ndarray
    deltas: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        c = np.array(self.centers, dtype=float)
        s = np.array(self.deltas, dtype=float)
        if c.ndim != 2 or c.shape[0] != w.shape[0] or c.shape[1] != s.shape[0]:
            raise DimensionMismatch(
                f"weights {w.shape}, centers {c.shape}, deltas {s.shape} disagree"
            )
        if np.any(w < 0) or abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise DomainError("mixture weights must be >= 0 and sum to 1")
        if np.any(s <= 0):
            raise NonPositiveDispersion("pointer dispersions must be > 0")
        for a in (w, c, s):
            a.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "deltas", s)

    @property
    def n_detectors(self) -> int:
        return self.deltas.shape[0]

    def density(self, x) -> np.ndarray:
        """Vectorized density; ``x`` has shape (..., N)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n_detectors:
            raise DimensionMismatch(
                f"point has {x.shape[-1]} coordinates, distribution {self.n_detectors}"
            )
        z = (x[..., None, :] - self.centers) / self.deltas
        comp = np.exp(-0.5 * np.sum(z**2, axis=-1)) / np.prod(np.sqrt(2 * np.pi) * self.deltas)
        return comp @ self.weights

    def marginal(self, axes) -> PointerDistribution:
        axes = [axes] if np.isscalar(axes) else list(axes)
        return PointerDistribution(self.weights, self.centers[:, axes], self.deltas[axes])

    def mean(self) -> np.ndarray:
        return self.weights @ self.centers

    def to_dict(self) -> dict:
        return {
            "components": [
                {"weight": float(w), "center": c.tolist(), "deltas": self.deltas.tolist()}
                for w, c in zip(self.weights, self.centers)
            ]
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, doc: dict) -> PointerDistribution:
        comps = doc["components"]
        deltas = {tuple(c["deltas"]) for c in comps}
        if len(deltas) != 1:
            raise DomainError("all components must share the detector dispersions")
        return cls(
            [c["weight"] for c in comps], [c["center"] for c in comps], list(deltas.pop())
        )

    @classmethod
    def from_json(cls, text: str) -> PointerDistribution:
        return cls.from_dict(json.loads(text))


def density_at(dist: PointerDistribution, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch("density_at takes a single point")
    return float(dist.density(x))
