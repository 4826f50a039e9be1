"""Lattice partitions of unity and the windowed symbol-class norms.

A symbol a on E = R^d (d = 2n) is tested against an order function m on
E x E*: for each lattice point gamma of E x E*, the window chi_gamma is
Weyl-quantized as an operator on L^2(E) and applied to a. Windows are
Gaussians normalised by their own periodisation, so the translates sum to
one exactly up to truncation of the periodisation sum.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .grids import GridSpec, GridSymbol
from .phase_space import Lattice, lattice_points
from .quantize import AliasingError, GridError, weyl_quantize

_CUT = 9.5  # Gaussian cut-off in widths: exp(-9.5^2/2) ~ 2e-20


class WindowError(ValueError):
    pass


def _periodized_1d(t, s, o, w):
    """sum_k exp(-(t - o - k s)^2 / (2 w^2)) on the reduced coordinate."""
    t = np.asarray(t, float)
    u = (t - o) / s
    frac = (u - np.floor(u)) * s
    r = int(np.ceil(_CUT * w / s)) + 1
    ks = np.arange(-r, r + 2) * s
    return np.exp(-((frac[..., None] - ks) ** 2) / (2 * w * w)).sum(-1)


@dataclass
class WindowFamily:
    """chi_gamma = tau_gamma chi_0 with chi_0 = g / sum_gamma tau_gamma g.

    ``g`` is the centered Gaussian exp(-|rho|^2 / (2 width^2)).
    """

    lattice: Lattice
    width: float
    partition: bool = True
    truncation: float = field(default=_CUT)

    @property
    def dim(self) -> int:
        return self.lattice.dim

    def _g(self, rho):
        return np.exp(-np.sum(rho ** 2, axis=-1) / (2 * self.width ** 2))

    def periodization(self, rho) -> np.ndarray:
        rho = np.asarray(rho, float)
        lat = self.lattice
        if lat.is_diagonal:
            out = np.ones(rho.shape[:-1])
            for k in range(self.dim):
                out = out * _periodized_1d(rho[..., k], lat.basis[k, k], lat.origin[k], self.width)
            return out
        inv = np.linalg.inv(lat.basis)
        c = (rho - lat.origin) @ inv.T
        red = (c - np.floor(c)) @ lat.basis.T
        smin = np.linalg.svd(lat.basis, compute_uv=False).min()
        r = int(np.ceil(self.truncation * self.width / smin)) + 1
        ks = np.stack(np.meshgrid(*[np.arange(-r, r + 2)] * self.dim, indexing="ij"), -1)
        offs = ks.reshape(-1, self.dim) @ lat.basis.T
        out = np.zeros(rho.shape[:-1])
        for o in offs:
            out += self._g(red - o)
        return out

    def chi0(self, rho) -> np.ndarray:
        rho = np.asarray(rho, float)
        return self._g(rho) / self.periodization(rho)

    def chi(self, rho, gamma) -> np.ndarray:
        return self.chi0(np.asarray(rho, float) - np.asarray(gamma, float))

    def factor(self, k: int):
        """1D profile along axis k of a diagonal lattice (chi_0 is their product)."""
        if not self.lattice.is_diagonal:
            raise WindowError("window factors exist only for diagonal lattices")
        s, w = self.lattice.basis[k, k], self.width

        def f(t):
            return np.exp(-np.asarray(t, float) ** 2 / (2 * w * w)) / _periodized_1d(t, s, 0.0, w)
        return f

    def sample(self, axes) -> GridSymbol:
        return GridSymbol.from_function(lambda *c: self.chi0(np.stack(c, -1)), axes)

    def to_json(self) -> dict:
        return {"lattice": self.lattice.to_json(), "width": self.width,
                "partition": self.partition, "truncation": self.truncation}


def build_partition(lat: Lattice, width: float = 1.0) -> WindowFamily:
    """Gaussian partition of unity subordinate to ``lat``."""
    if not width > 0:
        raise WindowError("window width must be positive")
    fam = WindowFamily(lat, float(width))
    # the periodised denominator is smallest in the deep holes of the cell
    g = np.linspace(0, 1, 9)
    cell = np.stack(np.meshgrid(*[g] * lat.dim, indexing="ij"), -1).reshape(-1, lat.dim)
    with np.errstate(under="ignore"):
        P = fam.periodization(lat.origin + cell @ lat.basis.T)
    if not np.all(np.isfinite(P)) or P.min() < 1e-250:
        raise WindowError(f"width {width} too small for the lattice: periodised "
                          "denominator underflows")
    return fam


def partition_residual(fam: WindowFamily, lower, upper, samples: int = 2000, seed: int = 0) -> float:
    """max |sum_gamma chi_gamma - 1| at random points of the box [lower, upper]."""
    rng = np.random.default_rng(seed)
    lower = np.broadcast_to(np.asarray(lower, float), (fam.dim,))
    upper = np.broadcast_to(np.asarray(upper, float), (fam.dim,))
    pts = lower + (upper - lower) * rng.uniform(size=(samples, fam.dim))
    reach = fam.truncation * fam.width + np.linalg.norm(fam.lattice.basis, axis=0).sum()
    gammas = lattice_points(fam.lattice, lower - reach, upper + reach)
    tot = np.zeros(samples)
    step = max(1, 200_000 // samples)
    for i in range(0, len(gammas), step):
        tot += fam.chi0(pts[:, None, :] - gammas[None, i:i + step]).sum(-1)
    return float(np.abs(tot - 1).max())


# ----------------------------------------------------------------- reports
def radial_verdict(points: np.ndarray, ratios: np.ndarray, inner_radius: float,
                   outer_radius: float | None = None):
    """Member iff the ratio sup over the core |point| <= r_in is at least the
    sup over the outer shell |point| >= r_out.

    On a finite box every sampled symbol has a finite constant; the
    desk-scale question is whether the constant is attained in the core
    or is still growing toward the edge of the box. Points between the
    two radii form a buffer that neither side sees.
    """
    outer_radius = inner_radius if outer_radius is None else outer_radius
    r = np.linalg.norm(points, axis=-1)
    inner = ratios[r <= inner_radius]
    outer = ratios[r >= outer_radius]
    s_in = float(inner.max(initial=0.0))
    s_out = float(outer.max(initial=0.0))
    return s_in >= s_out, s_in, s_out


@dataclass
class MembershipReport:
    mode: str
    points: np.ndarray
    ratios: np.ndarray
    norm: float
    aggregation: str
    member: bool
    inner_sup: float
    outer_sup: float
    inner_radius: float
    outer_radius: float
    truncation_radius: float
    extra: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return "member" if self.member else "non-member"

    @property
    def argmax(self) -> np.ndarray:
        return self.points[int(np.argmax(self.ratios))]

    def to_json(self, full: bool = False) -> dict:
        out = {
            "mode": self.mode,
            "norm": self.norm,
            "aggregation": self.aggregation,
            "verdict": self.verdict,
            "inner_sup": self.inner_sup,
            "outer_sup": self.outer_sup,
            "inner_radius": self.inner_radius,
            "outer_radius": self.outer_radius,
            "truncation_radius": self.truncation_radius,
            "count": int(self.ratios.size),
            "argmax": self.argmax.tolist() if self.ratios.size else None,
            **self.extra,
        }
        if full:
            out["points"] = self.points.tolist()
            out["ratios"] = self.ratios.tolist()
        return out

    def dumps(self, **kw) -> str:
        return json.dumps(self.to_json(**kw), sort_keys=True)


def _make_report(mode, points, ratios, norm, aggregation, radii, trunc, extra=None):
    r_in, r_out = radii
    member, s_in, s_out = radial_verdict(points, ratios, r_in, r_out)
    return MembershipReport(mode, points, ratios, float(norm), aggregation, member, s_in, s_out,
                            float(r_in), float(r_out), float(trunc), extra or {})


def default_radii(axes):
    """Core and shell radii (0.35 and 0.55 of the smallest box half-width)."""
    R = min(min(ax.L, ax.nyquist) for ax in axes)
    return 0.35 * R, 0.55 * R


def _grid_lp(vals, cell, p):
    v = np.abs(vals)
    if np.isinf(p):
        return v.max(axis=(-2, -1))
    return (np.sum(v ** p, axis=(-2, -1)) * cell) ** (1.0 / p)


def check_boundary(a: GridSymbol, tol: float = 1e-8):
    r = a.boundary_ratio()
    if r > tol:
        raise GridError(f"symbol not negligible at the box edge (boundary/peak = {r:.2e})")


# ----------------------------------------------------------------- lattice mode
@dataclass
class WindowOperators:
    """Weyl operators of the 1D window pairs for a diagonal lattice in E x E*.

    ``ops[j]`` has shape (K_j, L_j, N, N): window centred at
    (x_j, xi_j) = (xs[j][k], ts[j][l]).
    """

    xs: list
    ts: list
    ops: list


def window_operators(fam: WindowFamily, axes, dilate: float = 1.0, profile=None) -> WindowOperators:
    """Quantize every window pair chi^{(j)}_{k,l}(x_j, xi_j) on the grids ``axes``.

    With ``profile`` given, that 1D function replaces the window factor,
    evaluated at ``dilate * (t - center)``.
    """
    lat = fam.lattice
    d = len(axes)
    if lat.dim != 2 * d:
        raise GridError(f"window lattice has dimension {lat.dim}, symbol needs {2 * d}")
    if not lat.is_diagonal:
        raise NotImplementedError("lattice-mode windows need a diagonal lattice")
    xs, ts, ops = [], [], []
    for j, ax in enumerate(axes):
        sx, sx0 = lat.basis[j, j], lat.origin[j]
        st, st0 = lat.basis[j + d, j + d], lat.origin[j + d]
        om = ax.nyquist
        cx = sx0 + sx * np.arange(np.ceil((-ax.L - sx0) / sx), np.floor((ax.L - sx0) / sx) + 1)
        ct = st0 + st * np.arange(np.ceil((-om - st0) / st), np.floor((om - st0) / st) + 1)
        fx = profile or fam.factor(j)
        ft = profile or fam.factor(j + d)
        stack = np.empty((cx.size, ct.size, ax.N, ax.N), complex)
        for k, x0 in enumerate(cx):
            for l, t0 in enumerate(ct):
                stack[k, l] = weyl_quantize(
                    lambda X, T: fx(dilate * (X - x0)) * ft(dilate * (T - t0)), ax).matrix
        xs.append(cx)
        ts.append(ct)
        ops.append(stack)
    return WindowOperators(xs, ts, ops)


def windowed_norms(a: GridSymbol, W: WindowOperators, p: float) -> np.ndarray:
    """||chi_gamma^w a||_{L^p(E)} on the lattice box, shape (K1, K2, L1, L2)."""
    if a.ndim != 2:
        raise NotImplementedError("lattice mode supports symbols with n = 1")
    A1, A2 = W.ops
    cell = a.cell_volume
    K1, L1 = A1.shape[:2]
    K2, L2 = A2.shape[:2]
    out = np.empty((K1, K2, L1, L2))
    A2T = np.swapaxes(A2, -1, -2)
    for k in range(K1):
        for l in range(L1):
            B = A1[k, l] @ a.values
            out[k, :, l, :] = _grid_lp(B[None, None] @ A2T, cell, p)
    return out


def _lattice_points_4(W: WindowOperators) -> np.ndarray:
    return np.stack(np.meshgrid(W.xs[0], W.xs[1], W.ts[0], W.ts[1], indexing="ij"), -1)


def stilde_norm(a: GridSymbol, m, fam: WindowFamily, p: float = np.inf,
                radii=None, ops: WindowOperators | None = None,
                boundary_tol: float = 1e-8) -> MembershipReport:
    """sup_gamma ||chi_gamma^w a||_{L^p} / m(gamma) over the lattice points in the box.

    ``m`` is an order function on E x E* (callable on (..., 2d) arrays).
    """
    if not fam.partition:
        raise WindowError("window family is not flagged as a partition of unity")
    check_boundary(a, boundary_tol)
    W = ops or window_operators(fam, a.axes)
    norms = windowed_norms(a, W, p)
    pts = _lattice_points_4(W)
    ratios = norms / m(pts.reshape(-1, 4)).reshape(norms.shape)
    pts = pts.reshape(-1, 4)
    flat = ratios.ravel()
    trunc = float(np.linalg.norm(pts, axis=1).max())
    rep = _make_report("lattice", pts, flat, flat.max(initial=0.0), "sup",
                       radii or default_radii(a.axes), trunc,
                       {"p": "inf" if np.isinf(p) else p, "lattice": fam.lattice.to_json(),
                        "width": fam.width})
    rep.extra["shape"] = list(ratios.shape)
    return rep


def bspace_stilde_norm(a: GridSymbol, m, fam: WindowFamily, B, p: float = np.inf,
                       **kw) -> MembershipReport:
    """The B-norm of gamma -> ||chi_gamma^w a|| / m(gamma)."""
    from .bspaces import seq_norm

    rep = stilde_norm(a, m, fam, p, **kw)
    seq = rep.ratios.reshape(rep.extra["shape"])
    rep.norm = seq_norm(seq, B)
    rep.aggregation = str(B)
    rep.extra["B"] = B.to_json()
    return rep


# ----------------------------------------------------------------- STFT mode
def stft_membership(a: GridSymbol, m, fam: WindowFamily, radii=None,
                    alias_tol: float = 1e-6, edge_tol: float = 1e-8) -> MembershipReport:
    """sup over (j, x*) of |FT(chi_j a)(x*)| / m(j, x*) with j in a lattice of E.

    Lattice points whose windowed piece chi_j a is not negligible at the
    box edge (relative ``edge_tol`` of max |a|) are skipped and counted;
    their discrete transform would see the truncation.
    """
    d = a.ndim
    if fam.dim != d:
        raise GridError("spatial window family must live on the symbol's space")
    mesh = np.stack(a.mesh(), -1)
    L = np.array([ax.L for ax in a.axes])
    h = np.array([ax.h for ax in a.axes])
    js = lattice_points(fam.lattice, -L, L - h)
    peak = np.abs(a.values).max(initial=0.0)
    skipped = 0
    freqs = [2 * np.pi * np.fft.fftshift(np.fft.fftfreq(ax.N, d=ax.h)) for ax in a.axes]
    F = np.stack(np.meshgrid(*freqs, indexing="ij"), -1)
    cell = a.cell_volume
    edge = np.zeros(a.values.shape, bool)
    for k, ax in enumerate(a.axes):
        idx = np.abs(np.fft.fftshift(np.fft.fftfreq(ax.N, d=1.0 / ax.N)))
        e = idx >= ax.N // 2 - 2
        shape = [1] * d
        shape[k] = ax.N
        edge |= e.reshape(shape)
    pts, ratios = [], []
    worst_alias = 0.0
    for j in js:
        f = fam.chi(mesh, j) * a.values
        edge_val = max(np.abs(np.take(f, [0, -1], axis=k)).max() for k in range(d))
        if edge_val > edge_tol * peak:
            skipped += 1
            continue
        spec = np.fft.fftshift(np.fft.fftn(f)) * cell
        power = np.abs(spec) ** 2
        tot = power.sum()
        if tot > 0:
            worst_alias = max(worst_alias, float(power[edge].sum() / tot))
        mj = m(np.concatenate([np.broadcast_to(j, F.shape), F], -1).reshape(-1, 2 * d))
        ratios.append(np.abs(spec).ravel() / mj)
        pts.append(np.concatenate([np.broadcast_to(j, F.shape), F], -1).reshape(-1, 2 * d))
    if worst_alias > alias_tol:
        raise AliasingError(f"spectrum mass near the Nyquist edge is {worst_alias:.2e} of the total")
    pts = np.concatenate(pts) if pts else np.zeros((0, 2 * d))
    ratios = np.concatenate(ratios) if ratios else np.zeros(0)
    trunc = float(np.linalg.norm(pts, axis=1).max(initial=0.0))
    return _make_report("stft", pts, ratios, ratios.max(initial=0.0), "sup",
                        radii or default_radii(a.axes), trunc,
                        {"alias_fraction": worst_alias, "skipped": skipped,
                         "lattice": fam.lattice.to_json(),
                         "width": fam.width})


# ----------------------------------------------------------------- dual windows
def flat_top(t):
    """Schwartz profile equal to 1 to high order at 0: exp(-t^4 / 4)."""
    return np.exp(-np.asarray(t, float) ** 4 / 4.0)


class ConditioningError(np.linalg.LinAlgError):
    pass


@dataclass
class DualWindow:
    """psi_gamma^w = Psi^w (chi~_gamma^eps)^w, stored per coordinate pair.

    For a diagonal lattice both the windows and the frame-type operator
    S = sum_gamma (chi~_gamma^eps)^w chi_gamma^w factor as Kronecker
    products over the coordinate pairs, so S^{-1} = S_1^{-1} (x) S_2^{-1}.
    """

    eps: float
    chi: WindowOperators
    psi: list
    cond: float
    residual: float

    def apply(self, a: np.ndarray) -> np.ndarray:
        """sum_gamma psi_gamma^w chi_gamma^w a."""
        P1 = np.einsum("klij,kljm->im", self.psi[0], self.chi.ops[0])
        P2 = np.einsum("klij,kljm->im", self.psi[1], self.chi.ops[1])
        return P1 @ a @ P2.T


def symbol_conditioning(fam: WindowFamily, eps: float, samples: int = 2001) -> float:
    """sup / inf of the principal symbol sum_gamma chi~^eps_gamma chi_gamma.

    For a diagonal lattice the symbol factors over the axes and is periodic,
    so one cell per axis suffices. This sees ill-conditioning that the grid
    cannot: once 1/eps drops below the grid spacing the discrete operator no
    longer samples the gaps between the shrunken windows.
    """
    lat = fam.lattice
    if not lat.is_diagonal:
        raise WindowError("symbol conditioning needs a diagonal lattice")
    total = 1.0
    for k in range(fam.dim):
        s = lat.basis[k, k]
        f = fam.factor(k)
        t = np.linspace(0.0, s, samples)
        reach = int(np.ceil(fam.truncation * fam.width / s)) + 1
        js = np.arange(-reach, reach + 1) * s
        with np.errstate(under="ignore"):
            v = (flat_top(eps * (t[:, None] - js)) * f(t[:, None] - js)).sum(axis=1)
        lo = v.min()
        if lo <= 0:
            return np.inf
        total *= v.max() / lo
    return float(total)


def dual_window(fam: WindowFamily, eps: float, axes, max_cond: float = 1e8,
                chi_ops: WindowOperators | None = None, interior: float = 0.5,
                seed: int = 0) -> DualWindow:
    """Dense inversion of sum_gamma (chi~_gamma^eps)^w chi_gamma^w.

    chi~ is the product flat-top profile; chi~^eps(rho) = chi~(eps rho).
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    est = symbol_conditioning(fam, eps)
    if not est <= max_cond:
        raise ConditioningError(f"principal-symbol condition estimate {est:.2e} exceeds "
                                f"{max_cond:.0e}; use a smaller eps")
    chi = chi_ops or window_operators(fam, axes)
    tilde = window_operators(fam, axes, dilate=eps, profile=flat_top)
    S, psi, conds = [], [], []
    for B, A in zip(tilde.ops, chi.ops):
        Sj = np.einsum("klij,kljm->im", B, A)
        c = np.linalg.cond(Sj)
        conds.append(c)
        S.append(Sj)
    cond = float(np.prod(conds))
    if not cond <= max_cond:
        raise ConditioningError(f"condition number {cond:.2e} exceeds {max_cond:.0e}; "
                                "use a smaller eps")
    for Sj, B in zip(S, tilde.ops):
        inv = np.linalg.inv(Sj)
        psi.append(np.einsum("ij,kljm->klim", inv, B))
    dw = DualWindow(eps, chi, psi, cond, 0.0)
    dw.residual = dual_residual(dw, axes, interior, seed)
    return dw


def dual_residual(dw: DualWindow, axes, interior: float = 0.5, seed: int = 0,
                  trials: int = 8) -> float:
    """max ||sum psi chi u - u|| / ||u|| over random coherent states in the interior box."""
    rng = np.random.default_rng(seed)
    X = np.meshgrid(*[ax.points for ax in axes], indexing="ij")
    worst = 0.0
    for _ in range(trials):
        c = [rng.uniform(-interior * ax.L, interior * ax.L) for ax in axes]
        k = [rng.uniform(-interior * ax.nyquist, interior * ax.nyquist) for ax in axes]
        u = np.exp(-sum((Xi - ci) ** 2 for Xi, ci in zip(X, c)) / 2 + 1j * sum(
            ki * Xi for ki, Xi in zip(k, X)))
        r = dw.apply(u) - u
        worst = max(worst, np.linalg.norm(r) / np.linalg.norm(u))
    return float(worst)
