"""Run every named preset (or a chosen subset) into out/<preset>/.

    python3 scripts/reproduce_presets.py                 # all presets
    python3 scripts/reproduce_presets.py fig4 table1     # a subset
    python3 scripts/reproduce_presets.py --dt 1e-4       # coarser, faster
"""

import argparse
import sys
import time
from pathlib import Path

from qgem_screen.cli import PRESETS, run


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("presets", nargs="*", default=sorted(PRESETS))
    ap.add_argument("--out", type=Path, default=Path("out"))
    ap.add_argument("--dt", type=float, default=None)
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    args = ap.parse_args()

    worst = 0
    for name in args.presets:
        if name not in PRESETS:
            print(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}", file=sys.stderr)
            return 2
        argv = [PRESETS[name].subcommand, "--preset", name, "--out", str(args.out / name), "--format", args.format]
        if args.dt is not None:
            argv += ["--dt", repr(args.dt)]
        t0 = time.perf_counter()
        code = run(argv)
        print(f"{name:<7} exit {code}  {time.perf_counter() - t0:6.1f} s  -> {args.out / name}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
