"""Improper integrals over R^k of bracket-power products.

Convergence is decided from exponents (power counting over the subspaces
cut out by the atoms' linear parts); only convergent integrals are ever
handed to the numerical scheme. The numerical scheme is a tensorised
Gauss-Legendre rule on a graded inner box followed by doubling shells.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space


@dataclass(frozen=True)
class AffineAtom:
    """<M x + c>^p as a function of x in R^k."""

    M: np.ndarray
    c: np.ndarray
    p: float

    def __call__(self, X: np.ndarray) -> np.ndarray:
        y = X @ self.M.T + self.c
        return (1.0 + np.einsum("...i,...i->...", y, y)) ** (0.5 * self.p)


@dataclass
class AffineProduct:
    """const * prod_i <M_i x + c_i>^{p_i} on R^dim."""

    dim: int
    atoms: list = field(default_factory=list)
    const: float = 1.0

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        out = np.full(X.shape[0], float(self.const))
        for a in self.atoms:
            out *= a(X)
        return out

    def nontrivial(self):
        return [a for a in self.atoms if np.abs(a.M).max(initial=0.0) > 0 and a.p != 0]

    def centers(self) -> np.ndarray:
        pts = [np.zeros(self.dim)]
        for a in self.nontrivial():
            pts.append(-np.linalg.pinv(a.M) @ a.c)
        return np.array(pts)

    def scaled(self, power: float) -> "AffineProduct":
        return AffineProduct(self.dim, [AffineAtom(a.M, a.c, a.p * power) for a in self.atoms],
                             float(self.const) ** power)


def power_counting_degree(prod: AffineProduct, tol: float = 1e-10):
    """Largest superficial degree of divergence over all subspaces.

    For a subspace S, the degree is dim S plus the exponents of the atoms
    that do not vanish on S. The integral over R^dim converges iff every
    degree is negative; it suffices to check the maximal subspaces
    S = intersection of kernels of a subset of atoms.

    Returns
    -------
    (degree, basis) : float, ndarray
        The worst degree and an orthonormal basis of the subspace
        attaining it.
    """
    atoms = prod.nontrivial()
    worst, worst_basis = -np.inf, None
    for r in range(len(atoms) + 1):
        for subset in itertools.combinations(range(len(atoms)), r):
            if subset:
                S = null_space(np.vstack([atoms[i].M for i in subset]), rcond=tol)
            else:
                S = np.eye(prod.dim)
            if S.shape[1] == 0:
                continue
            deg = float(S.shape[1])
            for a in atoms:
                if np.abs(a.M @ S).max() > tol:
                    deg += a.p
            if deg > worst:
                worst, worst_basis = deg, S
    if worst_basis is None:
        return -np.inf, np.zeros((prod.dim, 0))
    return worst, worst_basis


@dataclass
class QuadResult:
    """Outcome of an improper integral.

    ``finite`` is False exactly when the exponent test reports divergence;
    ``value`` is then ``inf``.
    """

    value: float
    finite: bool
    degree: float
    radius: float = 0.0
    shells: int = 0
    tail_estimate: float = 0.0
    refinement_gap: float = 0.0
    converged: bool = True

    def to_json(self) -> dict:
        return {
            "value": self.value if self.finite else None,
            "finite": self.finite,
            "degree": self.degree,
            "radius": self.radius,
            "shells": self.shells,
            "tail_estimate": self.tail_estimate,
            "refinement_gap": self.refinement_gap,
            "converged": self.converged,
        }


class QuadratureError(RuntimeError):
    pass


def _gl(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def _graded_breaks(lo: float, hi: float, centers: np.ndarray, fine: float) -> np.ndarray:
    """Breakpoints on [lo, hi], fine near the centers and geometric away from them."""
    pts = {lo, hi}
    steps = fine * 2.0 ** np.arange(0, 40)
    steps = steps[steps < (hi - lo)]
    for c in np.unique(np.round(centers, 12)):
        for s in np.concatenate([[0.0], steps]):
            for v in (c - s, c + s):
                if lo < v < hi:
                    pts.add(float(v))
    b = np.array(sorted(pts))
    # split panels much wider than their distance to the nearest center
    out = [b[0]]
    for a, bb in zip(b[:-1], b[1:]):
        mid = 0.5 * (a + bb)
        dist = np.abs(centers - mid).min() if len(centers) else abs(mid)
        width = max(fine, 0.5 * dist)
        k = int(np.ceil((bb - a) / width))
        out.extend(np.linspace(a, bb, k + 1)[1:])
    return np.array(out)


def _tensor_rule(breaks_per_axis, order: int, exclude_box: float | None = None,
                 chunk: int = 400_000):
    """Yield (points, weights) batches of the tensor GL rule on the given panels."""
    xg, wg = _gl(order)
    axes_nodes, axes_w, axes_cell = [], [], []
    for b in breaks_per_axis:
        a, bb = b[:-1], b[1:]
        half = 0.5 * (bb - a)
        mid = 0.5 * (bb + a)
        nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
        w = (half[:, None] * wg[None, :]).ravel()
        cell = np.repeat(np.arange(len(a)), order)
        inside = np.repeat((a >= -exclude_box - 1e-12) & (bb <= exclude_box + 1e-12), order) \
            if exclude_box is not None else None
        axes_nodes.append(nodes)
        axes_w.append(w)
        axes_cell.append(inside)
    dim = len(breaks_per_axis)
    # iterate over the first axis to bound memory
    rest_nodes = np.stack(np.meshgrid(*axes_nodes[1:], indexing="ij"), -1).reshape(-1, dim - 1) \
        if dim > 1 else np.zeros((1, 0))
    rest_w = np.prod(np.stack(np.meshgrid(*axes_w[1:], indexing="ij"), -1).reshape(-1, dim - 1),
                     axis=1) if dim > 1 else np.ones(1)
    if exclude_box is not None and dim > 1:
        rest_in = np.all(np.stack(np.meshgrid(*axes_cell[1:], indexing="ij"), -1).reshape(-1, dim - 1),
                         axis=1)
    else:
        rest_in = np.ones(rest_nodes.shape[0], bool)
    step = max(1, chunk // max(1, rest_nodes.shape[0]))
    n0 = axes_nodes[0].size
    for s in range(0, n0, step):
        sl = slice(s, min(n0, s + step))
        x0 = axes_nodes[0][sl]
        w0 = axes_w[0][sl]
        pts = np.concatenate([np.repeat(x0, rest_nodes.shape[0])[:, None],
                              np.tile(rest_nodes, (x0.size, 1))], axis=1)
        w = np.repeat(w0, rest_w.size) * np.tile(rest_w, x0.size)
        if exclude_box is not None:
            in0 = axes_cell[0][sl] if dim > 0 else np.ones(x0.size, bool)
            drop = np.repeat(in0, rest_in.size) & np.tile(rest_in, x0.size)
            pts, w = pts[~drop], w[~drop]
        yield pts, w


def integrate(f, dim: int, degree: float, centers=None, rel_tol: float = 1e-8,
              order: int | None = None, fine: float = 0.5, max_shells: int = 60,
              refine_tol: float = 1e-6) -> QuadResult:
    """Integrate a vectorised ``f`` over R^dim.

    Parameters
    ----------
    f : callable
        Maps an (npts, dim) array to npts values.
    degree : float
        Decay degree of ``f`` at infinity (shell contributions scale like
        R^degree). Must be negative; callers decide divergence beforehand.
    centers : array, optional
        Points near which ``f`` has structure on the unit scale.
    """
    if not degree < 0:
        return QuadResult(np.inf, False, degree)
    centers = np.zeros((1, dim)) if centers is None else np.atleast_2d(centers)
    if order is None:
        order = {1: 16, 2: 12, 3: 6}.get(dim, 4)
    span = np.abs(centers).max()
    R0 = float(max(4.0, 2.0 * span + 4.0))

    def inner(q):
        breaks = [_graded_breaks(-R0, R0, centers[:, k], fine) for k in range(dim)]
        tot = 0.0
        for pts, w in _tensor_rule(breaks, q):
            tot += float(np.dot(w, f(pts)))
        return tot

    total = inner(order)
    coarse = inner(max(3, order - 2 if dim > 2 else order - 4))
    gap = abs(total - coarse) / max(abs(total), 1e-300)
    converged = gap <= refine_tol

    ratio = 2.0 ** degree
    R, shells, last = R0, 0, 0.0
    panels = 8 if dim <= 2 else 4
    while shells < max_shells:
        b = np.linspace(-2 * R, 2 * R, 2 * panels + 1)
        s = 0.0
        for pts, w in _tensor_rule([b] * dim, order, exclude_box=R):
            s += float(np.dot(w, f(pts)))
        total += s
        last = s
        shells += 1
        R *= 2
        if abs(s) < rel_tol * abs(total):
            break
    tail = last * ratio / (1.0 - ratio)
    total += tail
    if shells >= max_shells and abs(tail) > 1e-3 * abs(total):
        converged = False
    return QuadResult(total, True, degree, R, shells, tail, gap, converged)


def integrate_product(prod: AffineProduct, rel_tol: float = 1e-8, **kw) -> QuadResult:
    """Integral of an :class:`AffineProduct` over R^dim, or a divergence result."""
    deg, _ = power_counting_degree(prod)
    if deg >= 0:
        return QuadResult(np.inf, False, deg)
    return integrate(prod, prod.dim, deg, prod.centers(), rel_tol=rel_tol, **kw)


def sup_product(prod: AffineProduct, radius: float | None = None, samples: int = 41):
    """Supremum of an :class:`AffineProduct` over R^dim (inf if it grows).

    The product is bounded iff no subspace carries a positive net exponent.
    The maximum is located by a grid scan followed by local refinement.
    """
    from scipy.optimize import minimize

    atoms = prod.nontrivial()
    # growth along some direction?
    for r in range(len(atoms) + 1):
        for subset in itertools.combinations(range(len(atoms)), r):
            S = null_space(np.vstack([atoms[i].M for i in subset])) if subset else np.eye(prod.dim)
            if S.shape[1] == 0:
                continue
            net = sum(a.p for a in atoms if np.abs(a.M @ S).max() > 1e-10)
            if net > 0:
                return np.inf, None
    centers = prod.centers()
    if radius is None:
        radius = 2.0 * np.abs(centers).max() + 4.0
    g = np.linspace(-radius, radius, samples if prod.dim <= 2 else 9)
    X = np.stack(np.meshgrid(*[g] * prod.dim, indexing="ij"), -1).reshape(-1, prod.dim)
    X = np.vstack([X, centers])
    vals = prod(X)
    best = X[np.argmax(vals)]
    res = minimize(lambda v: -prod(v[None, :])[0], best, method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
    val = max(float(-res.fun), float(vals.max()))
    arg = res.x if -res.fun >= vals.max() else best
    return val, arg
