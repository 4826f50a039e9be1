"""Composition error of (a # b)^w against a^w b^w as the grid grows."""
import argparse
import json

import numpy as np

from phasecalc.families import gaussian
from phasecalc.quantize import moyal_convergence

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="24,32,40,48")
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rows = moyal_convergence(lambda X, Y: gaussian(X, Y, c=(0.3, -0.2), e=(0.5, 0.0)),
                             lambda X, Y: gaussian(X, Y, s=0.9, c=(-0.4, 0.1), e=(0.0, -0.6)),
                             sizes)
    print(json.dumps(rows, indent=2))
    errs = [r["error"] for r in rows if r["error"] is not None]
    if len(errs) > 1:
        print("log10 error per step:", np.round(np.diff(np.log10(errs)), 2).tolist())
