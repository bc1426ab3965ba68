"""Step-size study: final distance and |Phi| against dt for the nominal setup."""

import argparse

from qgem_screen.core import ExperimentConfig
from qgem_screen.phase import evaluate


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--z0-um", type=float, default=41.0)
    ap.add_argument("--steps", type=float, nargs="+", default=[1e-3, 5e-4, 2e-4, 1e-4, 5e-5, 2e-5, 1e-5])
    args = ap.parse_args()

    cfg = ExperimentConfig().with_schedule(initial_distance_d=args.z0_um * 1e-6)
    prev = None
    print(f"{'dt [s]':>9} {'z(T) [um]':>11} {'|Phi| [rad]':>12} {'rel change':>11}")
    for dt in args.steps:
        res = evaluate(cfg, dt)
        change = "" if prev is None else f"{abs(res.magnitude - prev) / prev:11.2e}"
        print(f"{dt:9.0e} {res.final_z * 1e6:11.4f} {res.magnitude:12.6f} {change}")
        prev = res.magnitude


if __name__ == "__main__":
    main()
