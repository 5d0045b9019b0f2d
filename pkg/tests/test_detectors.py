import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import box_integral, momentum_density_by_fourier
from protmeas.detectors import (
    PointerDistribution,
    build_momentum_grid,
    density_at,
    make_detector_bank,
)
from protmeas.errors import DimensionMismatch, DomainError, NonPositiveDispersion


def test_bank_of_three():
    bank = make_detector_bank([0.05, 0.05, 0.05])
    assert len(bank) == 3
    assert [d.delta_p for d in bank.detectors] == pytest.approx([10, 10, 10])
    assert bank.labels == ["x1", "x2", "x3"]


def test_single_detector_minimum_uncertainty():
    bank = make_detector_bank([1.0])
    assert bank.detectors[0].delta_p == 0.5


def test_non_positive_dispersion():
    with pytest.raises(NonPositiveDispersion):
        make_detector_bank([0.0, 0.1])
    with pytest.raises(NonPositiveDispersion):
        make_detector_bank([-1.0])


def test_duplicate_labels_rejected():
    with pytest.raises(DomainError):
        make_detector_bank([0.1, 0.1], labels=["a", "a"])


def test_grid_weights_sum_stable_under_refinement():
    bank = make_detector_bank([0.5])
    sums = [build_momentum_grid(bank, n, 5.0).weights[0].sum() for n in (64, 128, 256, 512)]
    # refinement has settled: successive sums agree far below the tolerance
    assert max(abs(a - b) for a, b in zip(sums, sums[1:])) < 1e-6
    assert abs(sums[0] - 1) <= 1e-4


def test_grid_node_range_five_sigma():
    grid = build_momentum_grid(make_detector_bank([0.5]), 64, 5.0)
    assert grid.nodes[0][0] == pytest.approx(-5.0)
    assert grid.nodes[0][-1] == pytest.approx(5.0)
    np.testing.assert_allclose(grid.nodes[0], -grid.nodes[0][::-1], atol=1e-15)


def test_grid_default_coverage_at_least_five_sigma():
    bank = make_detector_bank([0.2, 0.7])
    grid = build_momentum_grid(bank)
    for det, nodes, w in zip(bank.detectors, grid.nodes, grid.weights):
        assert nodes.max() >= 5 * det.delta_p
        assert abs(w.sum() - 1) <= 1e-4
        assert np.all(w >= 0)


def test_grid_preconditions():
    bank = make_detector_bank([0.5])
    with pytest.raises(DomainError):
        build_momentum_grid(bank, 4)
    with pytest.raises(DomainError):
        build_momentum_grid(bank, 64, 2.0)


def test_joint_grid_is_product():
    bank = make_detector_bank([0.5, 0.25])
    grid = build_momentum_grid(bank, 8, 4.0)
    p, w = grid.joint()
    assert p.shape == (64, 2) and grid.size == 64
    assert w.sum() == pytest.approx(grid.weights[0].sum() * grid.weights[1].sum())
    k = 8 * 3 + 5
    np.testing.assert_allclose(p[k], [grid.nodes[0][3], grid.nodes[1][5]])
    assert w[k] == pytest.approx(grid.weights[0][3] * grid.weights[1][5])


@pytest.mark.parametrize("dx", [0.05, 0.5, 2.0])
def test_fourier_consistency(dx):
    det = make_detector_bank([dx]).detectors[0]
    grid = build_momentum_grid(make_detector_bank([dx]), 64)
    p = grid.nodes[0]
    by_fourier = momentum_density_by_fourier(dx, p)
    assert np.abs(by_fourier - det.momentum_density(p)).max() <= 1e-6


def test_density_peak_value():
    for n in (1, 2, 3):
        dist = PointerDistribution([1.0], [np.zeros(n)], np.ones(n))
        assert density_at(dist, np.zeros(n)) == pytest.approx((2 * math.pi) ** (-n / 2))


def test_density_vanishes_between_far_components():
    e = np.array([0, 0, 1.0])
    dist = PointerDistribution([0.5, 0.5], [e, -e], [0.05] * 3)
    assert density_at(dist, np.zeros(3)) < 1e-80


def test_density_dimension_mismatch():
    dist = PointerDistribution([1.0], [[0.0, 0.0]], [1.0, 1.0])
    with pytest.raises(DimensionMismatch):
        density_at(dist, [0.0])


@pytest.mark.parametrize("n_det", [1, 2])
def test_density_integrates_to_one(n_det):
    rng = np.random.default_rng(n_det)
    centers = rng.uniform(-1, 1, (3, n_det))
    deltas = rng.uniform(0.2, 0.5, n_det)
    dist = PointerDistribution([0.2, 0.3, 0.5], centers, deltas)
    lo, hi = centers.min(0) - 8 * deltas, centers.max(0) + 8 * deltas
    values = [box_integral(dist.density, lo, hi, n) for n in (101, 201, 401)]
    assert abs(values[-1] - 1) <= 1e-4
    assert abs(values[-1] - values[-2]) <= 1e-4


def test_mixture_validation():
    with pytest.raises(DomainError):
        PointerDistribution([0.5, 0.6], [[0.0], [1.0]], [1.0])
    with pytest.raises(DomainError):
        PointerDistribution([1.5, -0.5], [[0.0], [1.0]], [1.0])
    with pytest.raises(DimensionMismatch):
        PointerDistribution([1.0], [[0.0, 1.0]], [1.0])


def test_json_round_trip_and_schema():
    dist = PointerDistribution([0.25, 0.75], [[1.0, -1.0], [0.5, 2.0]], [0.1, 0.2])
    doc = dist.to_dict()
    assert doc == {
        "components": [
            {"weight": 0.25, "center": [1.0, -1.0], "deltas": [0.1, 0.2]},
            {"weight": 0.75, "center": [0.5, 2.0], "deltas": [0.1, 0.2]},
        ]
    }
    back = PointerDistribution.from_json(dist.to_json())
    np.testing.assert_array_equal(back.weights, dist.weights)
    np.testing.assert_array_equal(back.centers, dist.centers)
    np.testing.assert_array_equal(back.deltas, dist.deltas)


@given(
    st.lists(st.floats(0.01, 1.0), min_size=1, max_size=4),
    st.integers(0, 2**32 - 1),
)
def test_marginal_keeps_weights(raw, seed):
    rng = np.random.default_rng(seed)
    w = np.array(raw) / sum(raw)
    dist = PointerDistribution(w, rng.normal(size=(len(w), 3)), [0.1, 0.2, 0.3])
    m = dist.marginal(1)
    assert np.all(m.weights >= 0) and abs(m.weights.sum() - 1) <= 1e-9
    np.testing.assert_allclose(m.centers[:, 0], dist.centers[:, 1])
