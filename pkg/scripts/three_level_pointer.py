"""Pointer density for a three-level system, compared with direct Gaussian-mixture enumeration."""

import argparse

import numpy as np

from protmeas.channel import apply_ideal_channel, make_ideal_channel
from protmeas.detectors import make_detector_bank
from protmeas.quantum import HermitianOperator, SystemState


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--shifts", type=float, nargs=3, default=[5.0, 6.0, 7.0])
    ap.add_argument("--delta", type=float, default=0.3)
    ap.add_argument("--points", type=int, default=512)
    args = ap.parse_args()

    psi = np.array([0.6, 0.48j, 0.64])
    ch = make_ideal_channel(
        HermitianOperator(np.diag([0.0, 1.0, 2.0])),
        [HermitianOperator(np.diag(args.shifts))],
        make_detector_bank([args.delta]),
    )
    dist, weights = apply_ideal_channel(ch, SystemState.pure(psi))
    x = np.linspace(min(args.shifts) - 6 * args.delta, max(args.shifts) + 6 * args.delta, args.points)
    direct = sum(
        abs(c) ** 2 * np.exp(-((x - s) ** 2) / (2 * args.delta**2)) / np.sqrt(2 * np.pi * args.delta**2)
        for c, s in zip(psi, args.shifts)
    )
    print("branch weights:", np.round(weights, 6).tolist())
    print(f"max |library - direct| on {args.points} points: {np.abs(dist.density(x[:, None]) - direct).max():.2e}")


if __name__ == "__main__":
    main()
