"""Run every CLI scenario with its materialised defaults.

    python3 scripts/run_all_scenarios.py --out runs/all --seed 0
"""

import argparse
import sys
import time
from pathlib import Path

from discrete_hardy.experiments.config import SCENARIOS, ExperimentConfig
from discrete_hardy.experiments.scenarios import run


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("runs/all"))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--skip", nargs="*", default=[], choices=SCENARIOS)
    args = ap.parse_args()
    status = 0
    for name in SCENARIOS:
        if name in args.skip:
            continue
        cfg = ExperimentConfig.materialize(name, {"seed": args.seed, "out_dir": str(args.out / name)})
        t0 = time.perf_counter()
        rep = run(cfg)
        failed = [c["name"] for c in rep.criteria if not c["passed"]]
        print(f"{name:14s} {'PASS' if rep.passed else 'FAIL'} {time.perf_counter() - t0:6.1f}s"
              + (f"  failing: {', '.join(failed)}" if failed else ""), flush=True)
        status |= not rep.passed
    return status


if __name__ == "__main__":
    sys.exit(main())
