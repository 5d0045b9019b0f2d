"""Monte Carlo study of field-axis recovery from joint spin readouts.

Repeats N-shot campaigns and reports the angular error distribution.
"""

import argparse

import numpy as np

from protmeas.qubit import BlochState, FieldConfig, estimate_axis, run_qubit_campaign


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--axis", type=float, nargs=3, default=[0.48, 0.6, 0.64])
    ap.add_argument("--bloch", type=float, nargs=3, default=[0.2, -0.3, 0.1])
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--shots", type=int, default=1000)
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    e = np.array(args.axis) / np.linalg.norm(args.axis)
    field = FieldConfig(1.0, tuple(e))
    state = BlochState(tuple(args.bloch))
    errors = np.empty(args.reps)
    for rep in range(args.reps):
        start = args.seed + rep * args.shots
        samples = run_qubit_campaign(state, field, [args.delta] * 3, range(start, start + args.shots))
        errors[rep] = estimate_axis([s.x for s in samples], truth=e).angular_error_deg

    print(f"delta={args.delta} shots={args.shots} reps={args.reps}")
    for q in (50, 90, 95, 99):
        print(f"  p{q:<2d} angular error: {np.percentile(errors, q):.4f} deg")
    print(f"  delta/sqrt(N) scale: {np.degrees(args.delta / np.sqrt(args.shots)):.4f} deg")


if __name__ == "__main__":
    main()
