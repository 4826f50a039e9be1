"""Solid translation-invariant sequence spaces on lattices and amalgam norms.

The built-in family is l^p(Gamma) and the mixed l^{p,q}(Gamma_1 x Gamma_2).
Lattice functions are dense arrays over a box of integer indices; entries
outside the box are zero.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .phase_space import Lattice, lattice_points


def _check_exp(p):
    p = float(p)
    if not (p >= 1):
        raise ValueError(f"exponent must lie in [1, inf], got {p}")
    return p


@dataclass(frozen=True)
class SeqSpaceSpec:
    """l^p, or mixed l^{p,q}: inner p over the trailing index block, outer q.

    For ``kind="mixed"`` the first ``split`` axes of an array index Gamma_1
    and the rest index Gamma_2; ``split=None`` means half of the axes.
    """

    kind: str = "lp"
    p: float = 2.0
    q: float | None = None
    split: int | None = None
    lattice: dict | None = None

    def __post_init__(self):
        if self.kind not in ("lp", "mixed"):
            raise ValueError(f"unknown sequence space kind {self.kind!r}")
        object.__setattr__(self, "p", _check_exp(self.p))
        if self.kind == "mixed":
            object.__setattr__(self, "q", _check_exp(self.p if self.q is None else self.q))

    def to_json(self) -> dict:
        out = {"kind": self.kind, "p": _json_exp(self.p)}
        if self.kind == "mixed":
            out["q"] = _json_exp(self.q)
            out["split"] = self.split
        if self.lattice is not None:
            out["lattice"] = self.lattice
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "SeqSpaceSpec":
        q = obj.get("q")
        return cls(obj.get("kind", "lp"), _parse_exp(obj.get("p", 2)),
                   None if q is None else _parse_exp(q), obj.get("split"), obj.get("lattice"))

    def __str__(self):
        if self.kind == "lp":
            return f"l^{self.p:g}"
        return f"l^{{{self.p:g},{self.q:g}}}"


def _json_exp(p):
    return "inf" if np.isinf(p) else p


def _parse_exp(p):
    return np.inf if p in ("inf", "Infinity", None) else float(p)


def lp(p) -> SeqSpaceSpec:
    return SeqSpaceSpec("lp", p)


def mixed(p, q, split=None) -> SeqSpaceSpec:
    return SeqSpaceSpec("mixed", p, q, split)


def _pnorm(v: np.ndarray, p: float, axis=None):
    v = np.abs(v)
    if np.isinf(p):
        return v.max(axis=axis, initial=0.0)
    if p == 1:
        return v.sum(axis=axis)
    scale = v.max(axis=axis, keepdims=True, initial=0.0)
    safe = np.where(scale > 0, scale, 1.0)
    s = ((v / safe) ** p).sum(axis=axis, keepdims=True) ** (1.0 / p) * scale
    return np.squeeze(s, axis=axis) if axis is not None else float(s.ravel()[0])


def seq_norm(u, B: SeqSpaceSpec) -> float:
    """Norm of a finitely supported lattice function in B."""
    u = np.asarray(u)
    if B.kind == "lp":
        return float(_pnorm(u.ravel(), B.p))
    if u.ndim < 2:
        raise ValueError("mixed norms need at least two index axes")
    split = B.split if B.split is not None else u.ndim // 2
    rows = u.reshape(int(np.prod(u.shape[:split])), -1)
    inner = _pnorm(rows, B.p, axis=1)
    return float(_pnorm(inner, B.q))


def translate(u: np.ndarray, shift) -> np.ndarray:
    """tau_gamma u on an enlarged box so nothing falls off the edge."""
    shift = tuple(int(s) for s in shift)
    pad = [(max(s, 0), max(-s, 0)) for s in shift]
    return np.pad(u, pad)


def precedes_rule(B: SeqSpaceSpec, Bt: SeqSpaceSpec) -> bool:
    """Rule table: l^p < l^q iff p <= q; mixed spaces componentwise."""
    if B.kind != Bt.kind:
        if B.kind == "lp" and Bt.kind == "mixed":
            return B.p <= min(Bt.p, Bt.q)
        return max(B.p, B.q) <= Bt.p
    if B.kind == "lp":
        return B.p <= Bt.p
    return B.p <= Bt.p and B.q <= Bt.q


# --------------------------------------------------------------- convolution
def lattice_convolve(f: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Full discrete convolution of index-box arrays (f * u)."""
    from scipy.signal import fftconvolve, convolve

    if f.size * u.size < 1e6:
        return convolve(f, u, method="direct")
    return fftconvolve(f, u)


@dataclass
class BoundReport:
    lhs: float
    rhs: float
    ratio: float
    holds: bool
    detail: dict = field(default_factory=dict)

    def to_json(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "ratio": self.ratio, "holds": self.holds,
                **self.detail}


def convolve_bound_check(f, u, B: SeqSpaceSpec, trials: int = 0, seed: int = 0,
                         tol: float = 1e-12) -> BoundReport:
    """Check ||f * u||_B <= ||f||_1 ||u||_B and, with ``trials``, the dominated form.

    Dominated kernels k(alpha, beta) with |k| <= f(alpha - beta) are sampled
    with random moduli and phases; v(alpha) = sum_beta k(alpha, beta) u(beta).
    """
    f = np.asarray(f)
    u = np.asarray(u)
    lhs = seq_norm(lattice_convolve(f, u), B)
    rhs = float(np.abs(f).sum()) * seq_norm(u, B)
    worst = lhs / rhs if rhs > 0 else 0.0
    if trials and f.ndim == 1 and u.ndim == 1:
        rng = np.random.default_rng(seed)
        n_out = f.size + u.size - 1
        # k(alpha, beta) indexed so that alpha - beta matches the index of f
        a_idx = np.arange(n_out)[:, None]
        b_idx = np.arange(u.size)[None, :]
        d = a_idx - b_idx
        valid = (d >= 0) & (d < f.size)
        env = np.where(valid, np.abs(f)[np.clip(d, 0, f.size - 1)], 0.0)
        for _ in range(trials):
            k = env * rng.uniform(0, 1, env.shape) * np.exp(2j * np.pi * rng.uniform(size=env.shape))
            v = k @ u
            worst = max(worst, seq_norm(v, B) / rhs if rhs > 0 else 0.0)
    holds = worst <= 1 + tol
    return BoundReport(lhs, rhs, worst, holds, {"B": B.to_json(), "trials": trials})


# --------------------------------------------------------------- precedes
@dataclass
class PrecedesReport:
    rule: bool
    falsified: bool
    max_ratio: float
    witness_growth: list
    N: float
    trials: int
    seed: int

    @property
    def verdict(self) -> bool:
        return self.rule and not self.falsified

    def to_json(self):
        return {"rule": self.rule, "falsified": self.falsified, "verdict": self.verdict,
                "max_ratio": self.max_ratio, "witness_growth": self.witness_growth,
                "N": self.N, "trials": self.trials, "seed": self.seed}


def _bracket(v):
    return np.sqrt(1.0 + np.sum(np.asarray(v, float) ** 2, axis=-1))


def dominated_extension(u: np.ndarray, lat1: Lattice, lat2: Lattice, N: float,
                        box2: np.ndarray) -> np.ndarray:
    """u~(g~) = sum_g <g~ - g>^{-N} |u(g)| on the points ``box2`` of the second lattice."""
    k = np.stack(np.meshgrid(*[np.arange(s) - s // 2 for s in u.shape], indexing="ij"), -1)
    pts1 = lat1.origin + k.reshape(-1, lat1.dim) @ lat1.basis.T
    w = np.abs(u).ravel()
    nz = w > 0
    diff = box2[:, None, :] - pts1[None, nz, :]
    return (_bracket(diff) ** (-N)) @ w[nz]


def precedes_check(B: SeqSpaceSpec, Bt: SeqSpaceSpec, N: float = 3.0, dim: int = 2,
                   lat1: Lattice | None = None, lat2: Lattice | None = None,
                   trials: int = 20, radius: int = 4, seed: int = 0,
                   calib: float | None = None) -> PrecedesReport:
    """Rule-table verdict for B < B~ plus randomized falsification.

    Random u supported in an index box of half-width ``radius`` are
    extended with the maximal dominated u~; the ratio ||u~||_{B~}/||u||_B
    is recorded. A growing-support witness (u = 1 on k^dim points, k
    doubling) tests whether the ratio is unbounded: growth by more than a
    factor 1.5 per doubling over the last two steps falsifies.
    """
    if N <= dim:
        raise ValueError("need N > lattice dimension")
    lat1 = lat1 or Lattice.scaled(dim)
    lat2 = lat2 or lat1
    rng = np.random.default_rng(seed)
    rule = precedes_rule(B, Bt)

    def ratio(u):
        shape = u.shape
        ext = max(shape) // 2 + int(np.ceil(4 * radius))
        lo = -ext * np.max(np.abs(lat1.basis)) * np.ones(dim)
        pts2, k2 = lattice_points(lat2, lo, -lo, return_indices=True)
        ut = dominated_extension(u, lat1, lat2, N, pts2)
        # pack onto the integer box of lattice 2
        kmin = k2.min(axis=0)
        arr = np.zeros(tuple(k2.max(axis=0) - kmin + 1))
        arr[tuple((k2 - kmin).T)] = ut
        nb = seq_norm(u, B)
        return seq_norm(arr, Bt) / nb if nb > 0 else 0.0

    side = 2 * radius + 1
    worst = 0.0
    delta = np.zeros((side,) * dim)
    delta[(radius,) * dim] = 1.0
    worst = max(worst, ratio(delta))
    for _ in range(trials):
        u = rng.standard_normal((side,) * dim) * (rng.uniform(size=(side,) * dim) < 0.5)
        worst = max(worst, ratio(u))
    growth = []
    for k in (2, 4, 8, 16):
        u = np.ones((k,) * dim)
        growth.append(ratio(u))
    falsified = len(growth) >= 3 and growth[-1] > 1.5 * growth[-2] and growth[-2] > 1.5 * growth[-3]
    if calib is not None and worst > calib:
        falsified = True
    if rule and falsified:
        raise AssertionError(f"rule table says {B} < {Bt} but falsification succeeded")
    return PrecedesReport(rule, falsified, float(worst), [float(g) for g in growth],
                          float(N), trials, seed)


# --------------------------------------------------------------- amalgams
@dataclass(frozen=True)
class AmalgamSpec:
    """[B] over a lattice: B-norm of gamma -> sup of |u| on the window at gamma.

    ``window`` is "cell" (fundamental domain centred at gamma) or "ball"
    (closed ball through the cell corners, so windows overlap).
    """

    B: SeqSpaceSpec
    lattice: Lattice | None = None
    window: str = "cell"
    N: float | None = None

    def __post_init__(self):
        if self.window not in ("cell", "ball"):
            raise ValueError("window must be 'cell' or 'ball'")
        if self.N is not None and self.lattice is not None and not self.N > self.lattice.dim:
            raise ValueError("decay exponent N must exceed the lattice dimension")

    def lattice_for(self, dim: int) -> Lattice:
        return self.lattice or Lattice.scaled(dim)

    def to_json(self) -> dict:
        return {"B": self.B.to_json(), "lattice": None if self.lattice is None else self.lattice.to_json(),
                "window": self.window, "N": self.N}

    @classmethod
    def from_json(cls, obj: dict) -> "AmalgamSpec":
        lat = obj.get("lattice")
        return cls(SeqSpaceSpec.from_json(obj["B"]), Lattice.from_json(lat) if lat else None,
                   obj.get("window", "cell"), obj.get("N"))


def window_sups(u: np.ndarray, axes, lat: Lattice, window: str = "cell"):
    """gamma -> sup over the window at gamma of |u|, on an integer index box.

    Returns (values, kmin) where values[k - kmin] belongs to lattice index k.
    """
    u = np.abs(np.asarray(u))
    d = u.ndim
    if lat.dim != d or len(axes) != d:
        raise ValueError("grid, lattice and function dimensions disagree")
    X = np.stack(np.meshgrid(*[ax.points for ax in axes], indexing="ij"), -1).reshape(-1, d)
    flat = u.ravel()
    inv = np.linalg.inv(lat.basis)
    c = (X - lat.origin) @ inv.T
    k0 = np.rint(c).astype(int)
    if window == "cell":
        ks, vals = k0, flat
    else:
        r = 0.5 * np.linalg.norm(lat.basis.sum(axis=1)) + 1e-12
        corner = 0.5 * np.abs(lat.basis).sum(axis=1)
        reach = int(np.ceil(np.max(np.abs(inv) @ (2 * corner)))) + 1
        offs = np.stack(np.meshgrid(*[np.arange(-reach, reach + 1)] * d, indexing="ij"), -1).reshape(-1, d)
        ks_l, vals_l = [], []
        for o in offs:
            k = k0 + o
            g = lat.origin + k @ lat.basis.T
            keep = np.linalg.norm(X - g, axis=1) <= r
            ks_l.append(k[keep])
            vals_l.append(flat[keep])
        ks, vals = np.concatenate(ks_l), np.concatenate(vals_l)
    kmin = ks.min(axis=0)
    shape = tuple(ks.max(axis=0) - kmin + 1)
    out = np.zeros(shape)
    np.maximum.at(out, tuple((ks - kmin).T), vals)
    return out, kmin


def amalgam_norm(u: np.ndarray, axes, spec: AmalgamSpec) -> float:
    """Cell-sup surrogate of the [B] norm of a grid function on a box."""
    vals, _ = window_sups(u, axes, spec.lattice_for(np.ndim(u)), spec.window)
    return seq_norm(vals, spec.B)


def window_equivalence(u: np.ndarray, axes, B: SeqSpaceSpec, lat: Lattice | None = None) -> float:
    """Ratio of the ball-window to the cell-window amalgam norm (>= 1)."""
    lat = lat or Lattice.scaled(np.ndim(u))
    a = amalgam_norm(u, axes, AmalgamSpec(B, lat, "cell"))
    b = amalgam_norm(u, axes, AmalgamSpec(B, lat, "ball"))
    return b / a if a > 0 else 1.0


# --------------------------------------------------------------- kernel growth
@dataclass
class GrowthReport:
    constant: float
    finite: bool
    values: list
    radii: list
    trials: int
    seed: int

    def to_json(self):
        return dict(self.__dict__)


def _box(d: int, R: int):
    k = np.stack(np.meshgrid(*[np.arange(-R, R + 1)] * d, indexing="ij"), -1)
    return k.reshape(-1, d).astype(float)


def _normalise(k, m, B, shape):
    nrm = seq_norm((np.abs(k) / m).reshape(shape), B)
    return k / nrm if nrm > 0 else k


def kernel_growth_estimate(m1, B1: SeqSpaceSpec, m2, B2: SeqSpaceSpec, m3, B3: SeqSpaceSpec,
                          dim: int = 2, radius: int = 6, trials: int = 20, seed: int = 0,
                          growth_tol: float = 0.10) -> GrowthReport:
    """max ||k3/m3||_{B3} over unit-norm dominated k1, k2 with k3 = sum_beta k1(., beta) k2(beta).

    ``m1(alpha, beta)`` takes two (P, dim) arrays and returns a (P,) array;
    ``m2``, ``m3`` take one (P, dim) array. Kernels on Gamma x Gamma are
    arranged with the alpha index block first, so a mixed B1 splits as
    (alpha, beta). The estimate is repeated at the doubled radius;
    growth above ``growth_tol`` flags divergence.
    """
    values, radii = [], []
    for R in (radius, 2 * radius):
        pts = _box(dim, R)
        P = len(pts)
        side = (2 * R + 1,) * dim
        A = np.repeat(pts, P, 0)
        Bp = np.tile(pts, (P, 1))
        M1 = m1(A, Bp).reshape(P, P)
        M2 = m2(pts)
        M3 = m3(pts)
        rng = np.random.default_rng(seed)
        shape1 = side + side
        cands = [(M1, M2)]
        for _ in range(trials):
            cands.append((M1 * rng.uniform(size=M1.shape), M2 * rng.uniform(size=M2.shape)))
        best = 0.0
        for k1, k2 in cands:
            k1 = _normalise(k1, M1, B1, shape1)
            k2 = _normalise(k2, M2, B2, side)
            k3 = k1 @ k2
            best = max(best, seq_norm((np.abs(k3) / M3).reshape(side), B3))
        values.append(float(best))
        radii.append(R)
    finite = values[1] <= (1 + growth_tol) * values[0]
    return GrowthReport(values[-1] if finite else np.inf, bool(finite), values, radii, trials, seed)


def compose_lattice_kernels(k1: np.ndarray, k2: np.ndarray) -> np.ndarray:
    """k(alpha, gamma) = sum_beta k1(alpha, beta) k2(beta, gamma) over a middle lattice."""
    return np.asarray(k1) @ np.asarray(k2)


# --------------------------------------------------------------- kernel action
@dataclass
class ActionReport:
    lhs: float
    rhs: float
    constant: float
    holds: bool

    def to_json(self):
        return dict(self.__dict__)


def kernel_action(K: np.ndarray, u: np.ndarray, axes, m1=None, m2=None, m3=None,
                  specs=None, constant: float | None = None):
    """K3(x) = int K(x, z) u(z) dz on a grid over E, with the amalgam bound.

    ``K`` is (P, P) over the flattened grid points, ``u`` is (P,). With
    majorants ``m1(x, z)``, ``m2(z)``, ``m3(x)`` and AmalgamSpecs
    ``specs = (S1, S2, S3)`` the report checks
    ||K3/m3||_[B3] <= C ||K/m1||_[B1] ||u/m2||_[B2].
    """
    dA = float(np.prod([ax.h for ax in axes]))
    K3 = K @ u * dA
    if m1 is None:
        return K3, None
    X = np.stack(np.meshgrid(*[ax.points for ax in axes], indexing="ij"), -1).reshape(-1, len(axes))
    P = len(X)
    shape = tuple(ax.N for ax in axes)
    S1, S2, S3 = specs
    M1 = m1(np.repeat(X, P, 0), np.tile(X, (P, 1))).reshape(P, P)
    lhs = amalgam_norm((np.abs(K3) / m3(X)).reshape(shape), axes, S3)
    n1 = amalgam_norm((np.abs(K) / M1).reshape(shape + shape), list(axes) * 2, S1)
    n2 = amalgam_norm((np.abs(u) / m2(X)).reshape(shape), axes, S2)
    C = 1.0 if constant is None else constant
    rhs = C * n1 * n2
    return K3, ActionReport(float(lhs), float(rhs), float(C), bool(lhs <= rhs * (1 + 1e-12)))
