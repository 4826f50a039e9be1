"""Worst-case C_p norm against the box diagonal bound on two lattices.

Prints the raw ratio and the covolume-scaled norms for the unit lattice
and its 1.5 dilate.
"""
import json

import numpy as np

from phasecalc.order_functions import bracket, product
from phasecalc.phase_space import Lattice
from phasecalc.schatten import verify_matrix_hypothesis

if __name__ == "__main__":
    m = product(bracket(1, -3, block="x"), bracket(1, -3, block="xstar"))
    rows = []
    for p in (1.0, 2.0, np.inf):
        for s in (1.0, 1.5):
            r = verify_matrix_hypothesis(m, Lattice.scaled(2, s), p, radius=6.0, trials=10)
            rows.append({"p": "inf" if np.isinf(p) else p, "scale": s, "ratio": r.ratio,
                         "worst_case_ratio": r.worst_case_ratio,
                         "scaled_measured": r.measured * s ** 2,
                         "scaled_box_bound": r.box_bound * s ** 2})
    print(json.dumps(rows, indent=2))
