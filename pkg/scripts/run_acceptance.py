"""Run the thirteen acceptance criteria and print one line each.

    python3 scripts/run_acceptance.py [--only 9 12] [--json out.json]
"""

import argparse
import json
import sys

from discrete_hardy.experiments.criteria import ALL


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--only", type=int, nargs="+", choices=sorted(ALL))
    ap.add_argument("--json", help="write the full results here")
    args = ap.parse_args()
    results = [ALL[k]() for k in (args.only or sorted(ALL))]
    for r in results:
        print(r.line(), flush=True)
    print(f"{sum(r.ok for r in results)}/{len(results)} criteria pass")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump([r.to_dict() for r in results], fh, indent=2, default=str)
    return 0 if all(r.ok for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
