"""Built-in test symbols on the phase plane (n = 1).

Members of S~(<x*>^{-4}) are single Gaussian bumps or finite sums.
Non-members are trains of bumps whose amplitude grows geometrically
while they move away from the origin, in x or in x*.
"""
from __future__ import annotations

import numpy as np

from .grids import GridSpec, GridSymbol


def gaussian(X, Y, c=(0.0, 0.0), s=1.0, e=(0.0, 0.0), sy=None):
    """exp(-|rho - c|^2 / 2s^2 + i e.rho) with optional anisotropic y-width."""
    sy = s if sy is None else sy
    return np.exp(-(X - c[0]) ** 2 / (2 * s * s) - (Y - c[1]) ** 2 / (2 * sy * sy)
                  + 1j * (e[0] * X + e[1] * Y))


def _train(step, shift=None, freq=None, s=0.6, terms=3, base=10.0):
    def f(X, Y):
        out = 0
        for k in range(terms):
            c = (0.0, 0.0) if shift is None else (shift[0] * k, shift[1] * k)
            e = (0.0, 0.0) if freq is None else (freq[0] * k, freq[1] * k)
            out = out + base ** k * gaussian(X, Y, c=c, s=s, e=e)
        return out
    return f


MEMBERS = {
    "gauss": lambda X, Y: gaussian(X, Y),
    "narrow": lambda X, Y: gaussian(X, Y, s=0.7),
    "shift": lambda X, Y: gaussian(X, Y, c=(1.0, -0.5)),
    "mod": lambda X, Y: gaussian(X, Y, e=(1.0, -0.5)),
    "sum": lambda X, Y: gaussian(X, Y, c=(-1.0, 0.0)) + 0.5 * gaussian(X, Y, c=(1.0, 1.0), e=(0.5, 0.0)),
    "aniso": lambda X, Y: gaussian(X, Y, s=0.8, sy=1.3),
    "poly": lambda X, Y: (X * X - Y) * gaussian(X, Y, s=0.9),
    "zero": lambda X, Y: np.zeros(np.broadcast(X, Y).shape, complex),
    "mod2": lambda X, Y: gaussian(X, Y, c=(0.5, 0.5), e=(-0.8, 0.6)),
}

NON_MEMBERS = {
    "xtrain": _train(1, shift=(2.3, 0.0)),
    "ytrain": _train(1, shift=(0.0, 2.3)),
    "dtrain": _train(1, shift=(1.8, -1.8)),
    "ftrain": _train(1, freq=(1.6, 0.0), s=1.2),
    "fytrain": _train(1, freq=(0.0, 1.6), s=1.2),
    "fdtrain": _train(1, freq=(1.2, 1.2), s=1.2),
}


def family(names=None) -> dict:
    """name -> (callable f(X, Y), expected membership)."""
    out = {k: (f, True) for k, f in MEMBERS.items()}
    out.update({k: (f, False) for k, f in NON_MEMBERS.items()})
    if names is not None:
        out = {k: out[k] for k in names}
    return out


def sample(name: str, grid: GridSpec | None = None) -> GridSymbol:
    grid = grid or GridSpec.balanced(48)
    f, _ = family()[name]
    return GridSymbol.from_function(f, (grid, grid))


# Near-centred shapes for the trace-norm desk check: location is held fixed,
# since the S~(m) norm of a displaced bump grows with m's spatial decay while
# the trace norm does not.
TRACE_CLASS = {
    "s1.0": lambda X, Y: gaussian(X, Y),
    "s0.8": lambda X, Y: gaussian(X, Y, s=0.8),
    "s1.2": lambda X, Y: gaussian(X, Y, s=1.2),
    "aniso_x": lambda X, Y: gaussian(X, Y, s=0.8, sy=1.2),
    "aniso_y": lambda X, Y: gaussian(X, Y, s=1.2, sy=0.8),
    "mod0.3": lambda X, Y: gaussian(X, Y, e=(0.3, 0.0)),
    "shift0.3": lambda X, Y: gaussian(X, Y, c=(0.3, 0.0)),
    "pair": lambda X, Y: gaussian(X, Y) + 0.5 * gaussian(X, Y, s=0.8),
    "rotated": lambda X, Y: gaussian((X + Y) / np.sqrt(2), (Y - X) / np.sqrt(2), s=0.8, sy=1.2),
}
