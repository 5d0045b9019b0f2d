"""Finite-duration channel distance D(T) for a qubit with a non-commuting observable."""

import argparse
import csv
import sys

import numpy as np

from protmeas.detectors import build_momentum_grid, make_detector_bank
from protmeas.finite_time import FiniteTimeConfig, convergence_sweep, geometric_durations
from protmeas.quantum import HermitianOperator, spectral_decompose

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]]),
    "z": np.diag([1.0, -1.0]).astype(complex),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--omega", type=float, default=1.0)
    ap.add_argument("--observable", choices=sorted(PAULI), default="x")
    ap.add_argument("--delta", type=float, default=0.5)
    ap.add_argument("--t-min", type=float, default=10.0)
    ap.add_argument("--t-max", type=float, default=1000.0)
    ap.add_argument("--per-decade", type=int, default=10)
    ap.add_argument("--grid-points", type=int, default=64)
    args = ap.parse_args()

    basis = spectral_decompose(HermitianOperator(args.omega * PAULI["z"]))
    cfg = FiniteTimeConfig(args.t_min, [HermitianOperator(PAULI[args.observable])], basis)
    grid = build_momentum_grid(make_detector_bank([args.delta]), args.grid_points)
    curve = convergence_sweep(cfg, grid, geometric_durations(args.t_min, args.t_max, args.per_decade))

    out = csv.writer(sys.stdout)
    out.writerow(["T", "D", "D_envelope"])
    out.writerows(curve.to_rows())
    print(f"# envelope_fit_slope={curve.envelope_slope:.4f}")


if __name__ == "__main__":
    main()
