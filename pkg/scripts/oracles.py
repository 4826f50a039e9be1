"""Independent reference values, computed without the package.

Each value comes from a closed form or from scipy quadrature of the
defining integral. The test suite holds frozen copies of this output.
"""
import json

import numpy as np
from scipy import integrate


def bargmann_constant():
    """C making T unitary for phi = (i/2)(x - y)^2, n = 1.

    With u0 = pi^{-1/4} e^{-y^2/2} normalised, C^{-2} is the weighted
    L^2 norm squared of z -> int e^{-(z - y)^2/2} u0(y) dy, weight e^{-(Im z)^2}.
    The closed form is 2^{-1/2} pi^{-3/4}.
    """
    closed = 2 ** -0.5 * np.pi ** -0.75
    y = np.linspace(-15, 15, 3001)
    dy = y[1] - y[0]
    u0 = np.pi ** -0.25 * np.exp(-y * y / 2)

    def dens(b, a):
        z = a + 1j * b
        v = np.sum(np.exp(-(z - y) ** 2 / 2) * u0) * dy
        return abs(v) ** 2 * np.exp(-b * b)

    norm2 = integrate.dblquad(dens, -10, 10, -10, 10, epsabs=1e-12)[0]
    return {"closed_form": closed, "quadrature": norm2 ** -0.5}


def fiber_integral():
    """int over R^2 of <x*>^{-3}: radial closed form 2 pi."""
    q = integrate.quad(lambda r: 2 * np.pi * r * (1 + r * r) ** -1.5, 0, np.inf)[0]
    return {"closed_form": 2 * np.pi, "quadrature": q}


def coherent_decay():
    """e^{-Phi(z)} |T u0(z)| = c e^{-|z|^2/4} with u0 = pi^{-1/4} e^{-y^2/2}."""
    C = 2 ** -0.5 * np.pi ** -0.75
    z = 0.7 - 0.4j
    re = integrate.quad(lambda y: (np.exp(-(z - y) ** 2 / 2) * np.exp(-y * y / 2)).real, -20, 20)[0]
    im = integrate.quad(lambda y: (np.exp(-(z - y) ** 2 / 2) * np.exp(-y * y / 2)).imag, -20, 20)[0]
    val = C * np.pi ** -0.25 * abs(re + 1j * im) * np.exp(-z.imag ** 2 / 2)
    return {"closed_form_c": 1 / np.sqrt(2 * np.pi), "exponent": 0.25,
            "quadrature_c": val / np.exp(-abs(z) ** 2 / 4)}


def gaussian_moyal(s=0.3, t=0.7, rho=(0.4, -0.2)):
    """e^{-s|r|^2} # e^{-t|r|^2} = (1 + st)^{-1} e^{-(s+t)|r|^2/(1+st)}.

    Quadrature of the integral form of the product,
    a#b(r) = pi^{-2} int int a(r + u) b(r + v) e^{2i sigma(u, v)} du dv
    (n = 1), done in closed form over u for each v and numerically over v.
    """
    x, xi = rho
    closed = np.exp(-(s + t) * (x * x + xi * xi) / (1 + s * t)) / (1 + s * t)

    def inner_u(v1, v2):
        # int e^{-s|r+u|^2} e^{2i (u1 v2 - u2 v1)} du: Gaussian in u
        k = np.array([2 * v2, -2 * v1])
        r = np.array([x, xi])
        return (np.pi / s) * np.exp(-k @ k / (4 * s) - 1j * k @ r)

    def f(v2, v1, part):
        val = inner_u(v1, v2) * np.exp(-t * ((x + v1) ** 2 + (xi + v2) ** 2)) / np.pi ** 2
        return val.real if part == 0 else val.imag

    re = integrate.dblquad(lambda v2, v1: f(v2, v1, 0), -8, 8, -8, 8)[0]
    im = integrate.dblquad(lambda v2, v1: f(v2, v1, 1), -8, 8, -8, 8)[0]
    return {"closed_form": closed, "quadrature": re, "imag": im}


def separable_exponent(N1, N2, M1, M2, n=1):
    a1, a2 = -N2 + M1, -N1 + M2
    return max(a1 + max(a2 + 2 * n, 0), a2 + max(a1 + 2 * n, 0))


if __name__ == "__main__":
    out = {
        "bargmann_constant": bargmann_constant(),
        "fiber_integral": fiber_integral(),
        "coherent_decay": coherent_decay(),
        "gaussian_moyal": gaussian_moyal(),
        "separable_exponents": {str(t): separable_exponent(*t) for t in
                                [(4, 4, 0, 0), (5, 4, 1, 0), (6, 4, 0, 1), (2, 2, 0, 0), (5, 3, 1, 0)]},
    }
    print(json.dumps(out, indent=2, sort_keys=True))
