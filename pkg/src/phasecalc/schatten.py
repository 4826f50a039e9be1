"""Schatten-von Neumann norms and the lattice-matrix C_p certificates."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .order_functions import OrderFunction, OrderFunctionError
from .phase_space import Lattice, SymplecticSpace, chord_map, lattice_points
from .quadrature import power_counting_degree, sup_product


def cp_norm(M, p: float) -> float:
    """(sum s_k^p)^{1/p} over the singular values; the largest one for p = inf."""
    p = float(p)
    if not p >= 1:
        raise ValueError("Schatten exponent must be >= 1")
    s = np.linalg.svd(np.asarray(M), compute_uv=False)
    if s.size == 0:
        return 0.0
    if np.isinf(p):
        return float(s[0])
    top = s[0]
    if top == 0:
        return 0.0
    return float(top * np.sum((s / top) ** p) ** (1.0 / p))


# ------------------------------------------------------------ lattice sums
@dataclass
class LatticeSum:
    value: float
    finite: bool
    degree: float
    radius: float
    tail_estimate: float

    def to_json(self):
        return dict(self.__dict__)


def lattice_sum(f, lat: Lattice, degree: float, rel_tol: float = 1e-6, R0: float = 8.0,
                max_points: int = 600_000) -> LatticeSum:
    """sum_{g in lat} f(g) for f decaying with total degree ``degree`` < 0.

    Box sums S(R) over |g|_inf <= R are formed for R doubling; the last
    shell is extrapolated geometrically with ratio 2^degree.
    """
    if not degree < 0:
        return LatticeSum(np.inf, False, degree, 0.0, np.inf)
    R = R0
    prev = None
    last_shell = 0.0
    while True:
        pts = lattice_points(lat, -R, R)
        S = float(np.sum(f(pts)))
        if prev is not None:
            last_shell = S - prev
            if abs(last_shell) <= rel_tol * abs(S):
                break
        prev = S
        nxt = (2 * R / np.abs(np.linalg.eigvals(lat.basis)).min()) ** lat.dim
        if nxt > max_points:
            break
        R *= 2
    rho = 2.0 ** degree
    tail = last_shell * rho / (1 - rho)
    return LatticeSum(S + tail, True, degree, R, tail)


def _split_atoms(m: OrderFunction):
    xb, xs = m.x_block, m.xstar_block
    mixed = any(np.any(a.A[:, xb]) and np.any(a.A[:, xs]) for a in m.atoms if a.p != 0)
    return mixed


def _alpha_restriction(m: OrderFunction, delta, power):
    """alpha -> m(alpha + delta/2, J^{-1} delta)^power as an AffineProduct."""
    space = SymplecticSpace(m.n)
    d = space.d
    P = np.vstack([np.eye(d), np.zeros((d, d))])
    r = np.concatenate([0.5 * delta, space.J_inv @ delta])
    return m.restrict(P, r, power)


def _xstar_degree(m: OrderFunction, p: float) -> float:
    """Decay degree in delta of the diagonal l^p norms (x* part at x = 0)."""
    space = SymplecticSpace(m.n)
    d = space.d
    # delta -> m(delta/2 + alpha, J^{-1} delta); the alpha-norm removes x-dependence
    # of atoms that depend on x only; keep the atoms that see x*
    xb = m.x_block
    P = np.vstack([np.zeros((d, d)), space.J_inv])
    prod = m.restrict(P, np.zeros(2 * d))
    prod.atoms = [at for at, a in zip(prod.atoms, m.atoms) if np.any(a.A[:, m.xstar_block])]
    return power_counting_degree(prod)[0]


@dataclass
class DiagonalBound:
    value: float
    finite: bool
    p: float
    radius: float
    tail_estimate: float
    detail: dict = field(default_factory=dict)

    def to_json(self):
        return {"value": self.value if self.finite else None, "finite": self.finite,
                "p": "inf" if np.isinf(self.p) else self.p, "truncation_radius": self.radius,
                "tail_estimate": self.tail_estimate, **self.detail}


def diagonal_cp_bound(m: OrderFunction, lat: Lattice, p: float, rel_tol: float = 1e-6,
                      R0: float = 8.0) -> DiagonalBound:
    """sum over chords delta of || alpha -> m(alpha + delta/2, J^{-1} delta) ||_{l^p(lat)}.

    The lattice lives in E; ``m`` on E x E*. Infinite when either the
    alpha-norms or the delta-sum fail the exponent test.
    """
    p = float(p)
    if not p >= 1:
        raise ValueError("p must be >= 1")
    if m.domain != "ExE*" or lat.dim != 2 * m.n:
        raise OrderFunctionError("need m on E x E* and a lattice in E")
    d = lat.dim
    inf_p = np.isinf(p)

    def diag_norm(delta):
        prod = _alpha_restriction(m, delta, 1.0 if inf_p else p)
        if inf_p:
            return sup_product(prod)[0]
        deg = power_counting_degree(prod)[0]
        res = lattice_sum(prod, lat, deg, rel_tol, R0 / 2)
        return res.value ** (1.0 / p) if res.finite else np.inf

    first = diag_norm(np.zeros(d))
    if not np.isfinite(first):
        return DiagonalBound(np.inf, False, p, 0.0, np.inf, {"reason": "diagonal norm diverges"})
    deg_delta = _xstar_degree(m, 1.0)
    if not deg_delta < 0:
        return DiagonalBound(np.inf, False, p, 0.0, np.inf,
                             {"reason": "chord sum diverges", "degree": deg_delta})

    space = SymplecticSpace(m.n)
    if not _split_atoms(m):
        # alpha-norm of the x-part depends only on delta/2 modulo the lattice
        x_atoms = [a for a in m.atoms if np.any(a.A[:, m.x_block])]
        cosets = {}
        for bits in itertools.product((0, 1), repeat=d):
            c = lat.basis @ np.array(bits, float)
            cosets[bits] = diag_norm_x(m, lat, c, p, rel_tol, R0)
        inv = np.linalg.inv(lat.basis)

        def f(deltas):
            k = np.rint(deltas @ inv.T).astype(int) % 2
            cx = np.array([cosets[tuple(row)] for row in k])
            xi = deltas @ space.J_inv.T
            pts = np.concatenate([np.zeros_like(deltas), xi], 1)
            return cx * _xstar_part(m, pts)
    else:
        def f(deltas):
            return np.array([diag_norm(dl) for dl in deltas])

    res = lattice_sum(f, lat, deg_delta, rel_tol, R0)
    return DiagonalBound(res.value, res.finite, p, res.radius, res.tail_estimate,
                         {"chord_degree": deg_delta})


def _xstar_part(m: OrderFunction, pts):
    out = np.full(len(pts), m.constant)
    for a in m.atoms:
        if np.any(a.A[:, m.xstar_block]) and not np.any(a.A[:, m.x_block]):
            y = pts @ a.A.T + a.b
            out *= (1.0 + np.sum(y * y, axis=1)) ** (0.5 * a.p)
    return out


def diag_norm_x(m: OrderFunction, lat: Lattice, delta, p, rel_tol, R0):
    """l^p norm over alpha of the x-only atoms at alpha + delta/2."""
    from .quadrature import AffineAtom, AffineProduct

    d = lat.dim
    atoms = [AffineAtom(a.A[:, m.x_block], a.A[:, m.x_block] @ (0.5 * delta) + a.b,
                        a.p * (1.0 if np.isinf(p) else p))
             for a in m.atoms if np.any(a.A[:, m.x_block])]
    prod = AffineProduct(d, atoms, 1.0)
    if np.isinf(p):
        return sup_product(prod)[0]
    deg = power_counting_degree(prod)[0]
    res = lattice_sum(prod, lat, deg, rel_tol, R0 / 2)
    return res.value ** (1.0 / p) if res.finite else np.inf


# ------------------------------------------------------------ matrix hypothesis
def majorant_matrix(m: OrderFunction, lat: Lattice, radius: float):
    """m(q(alpha, beta)) on the lattice points of the box |.|_inf <= radius."""
    space = SymplecticSpace(m.n)
    pts = lattice_points(lat, -radius, radius)
    A = np.repeat(pts[:, None, :], len(pts), 1)
    B = np.repeat(pts[None, :, :], len(pts), 0)
    mid, chord = chord_map(space, A, B)
    return m(np.concatenate([mid, chord], -1)), pts


def box_diagonal_bound(env: np.ndarray, pts: np.ndarray, lat: Lattice, p: float) -> float:
    """sum over chords of the l^p norm of each translated diagonal of ``env``."""
    inv = np.linalg.inv(lat.basis)
    k = np.rint((pts - lat.origin) @ inv.T).astype(int)
    D = (k[None, :, :] - k[:, None, :]).reshape(-1, lat.dim)
    vals = np.abs(env).ravel()
    order = np.lexsort(D.T[::-1])
    D, vals = D[order], vals[order]
    brk = np.flatnonzero(np.any(np.diff(D, axis=0) != 0, axis=1)) + 1
    groups = np.split(vals, brk)
    if np.isinf(p):
        return float(sum(g.max() for g in groups))
    return float(sum(np.sum(g ** p) ** (1.0 / p) for g in groups))


@dataclass
class HypothesisReport:
    p: float
    bound: float
    box_bound: float
    measured: float
    ratio: float
    worst_case_ratio: float
    truncation_radius: float
    seed: int
    trials: int

    def to_json(self):
        d = dict(self.__dict__)
        d["p"] = "inf" if np.isinf(self.p) else self.p
        return d


class TriangleViolation(AssertionError):
    pass


def verify_matrix_hypothesis(m: OrderFunction, lat: Lattice, p: float, radius: float = 6.0,
                             trials: int = 50, seed: int = 0) -> HypothesisReport:
    """Random lattice matrices dominated by m(q(alpha, beta)) against the diagonal bound.

    The finite-box bound (the same chord sum restricted to the box) is an
    exact triangle inequality; the infinite-lattice bound is reported too.
    """
    full = diagonal_cp_bound(m, lat, p)
    if not full.finite:
        raise OrderFunctionError("diagonal C_p bound is infinite for this order function")
    env, pts = majorant_matrix(m, lat, radius)
    bb = box_diagonal_bound(env, pts, lat, p)
    rng = np.random.default_rng(seed)
    worst_case = cp_norm(env, p) / bb
    measured = cp_norm(env, p)
    ratio = worst_case
    for _ in range(trials):
        M = env * rng.uniform(size=env.shape) * np.exp(2j * np.pi * rng.uniform(size=env.shape))
        c = cp_norm(M, p)
        if c / bb > ratio:
            ratio, measured = c / bb, c
    if ratio > 1 + 1e-8:
        raise TriangleViolation(f"C_p norm exceeds the diagonal bound (ratio {ratio})")
    return HypothesisReport(p, full.value, bb, measured, ratio, worst_case, radius, seed, trials)


def single_diagonal(values, shift: int, size: int | None = None) -> np.ndarray:
    """Matrix with ``values`` on the diagonal offset by ``shift``."""
    values = np.asarray(values)
    n = values.size + abs(shift) if size is None else size
    M = np.zeros((n, n), dtype=values.dtype)
    idx = np.arange(values.size)
    if shift >= 0:
        M[idx, idx + shift] = values
    else:
        M[idx - shift, idx] = values
    return M


def lp_norm(v, p: float) -> float:
    v = np.abs(np.asarray(v))
    if np.isinf(p):
        return float(v.max(initial=0.0))
    return float(np.sum(v ** p) ** (1.0 / p))


# ------------------------------------------------------------ symbol C_p check
@dataclass
class SymbolCpReport:
    p: float
    measured: float
    stilde: float
    diagonal: float
    bound: float
    ratio: float
    constant: float | None = None
    within: bool | None = None
    seed: int = 0

    def to_json(self):
        d = dict(self.__dict__)
        d["p"] = "inf" if np.isinf(self.p) else self.p
        return d


def symbol_cp_check(a, m: OrderFunction, p: float, fam, lat: Lattice | None = None,
                    constant: float | None = None, band: float = 0.5, ops=None,
                    diag: DiagonalBound | None = None) -> SymbolCpReport:
    """||a^w||_{C_p} against (S~(m) norm of a) x (diagonal C_p bound of m).

    With ``constant`` (from a calibration symbol) the report checks that
    the measured ratio lies within ``band`` of it.
    """
    from .order_functions import cp_criterion_integral
    from .quantize import weyl_quantize
    from .symbol_class import stilde_norm

    lat = lat or Lattice.scaled(2 * m.n)
    diag = diag or diagonal_cp_bound(m, lat, p)
    if not diag.finite:
        raise OrderFunctionError("diagonal C_p bound is infinite")
    g = a.axes[0]
    measured = cp_norm(weyl_quantize(a, g).matrix, p)
    st = stilde_norm(a, m, fam, ops=ops).norm
    bound = st * diag.value
    ratio = measured / bound if bound > 0 else 0.0
    within = None
    if constant is not None and bound > 0:
        within = bool(abs(ratio / constant - 1) <= band)
    return SymbolCpReport(float(p), measured, st, diag.value, bound, ratio, constant, within)
