"""Tolerance bound per imbalance axis, then a Monte Carlo check with those bounds as sigmas."""

import argparse
import math

from qgem_screen.core import ExperimentConfig
from qgem_screen.phase import evaluate
from qgem_screen.sensitivity import monte_carlo, sweep

RANGES = {"delta_d1": 1e-6, "delta_d2": 1e-6, "delta_dB": 1e5, "delta_theta": math.pi / 2}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dt", type=float, default=1e-4)
    ap.add_argument("--threshold", type=float, default=0.12)
    ap.add_argument("--samples", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = ExperimentConfig()
    phi0 = evaluate(cfg, args.dt).magnitude
    print(f"nominal |Phi| = {phi0:.5f} rad")
    bounds = {}
    for axis, hi in RANGES.items():
        res = sweep(cfg, axis, hi, 11, threshold=args.threshold, dt=args.dt)
        bounds[axis] = res.tolerance_bound
        print(f"  {axis:<12} bound = {res.tolerance_bound!r}")

    sig = {k: v for k, v in bounds.items() if v is not None}
    mc = monte_carlo(cfg, sig, args.samples, seed=args.seed, dt=args.dt)
    shift = (mc.mean - phi0) / phi0
    print(f"monte carlo: mean {mc.mean:.5f} +/- {mc.std_of_mean:.1e}, std {mc.std:.4f}, "
          f"shift {shift:+.2%}, failed {mc.n_failed}/{args.samples}")


if __name__ == "__main__":
    main()
