"""Run the acceptance criteria and write the JSON summary."""
import argparse
import json
import sys

from phasecalc import acceptance

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--only", default="", help="comma-separated criterion numbers")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="")
    args = ap.parse_args()
    numbers = [int(k) for k in args.only.split(",") if k]
    res = acceptance.run(numbers or None, seed=args.seed, log=print)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump([r.to_json() for r in res], fh, indent=2, sort_keys=True)
    sys.exit(0 if all(r.passed for r in res) else 1)
