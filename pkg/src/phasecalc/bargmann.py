"""Generalized Bargmann transform, effective kernels and magnetic translations.

The phase is phi(x, y) = x.Axx x / 2 + x.Axy y + y.Ayy y / 2 with complex
n x n blocks. Everything on the transform side is stored pre-weighted by
exp(-Phi), so values stay bounded.

For n = 1 a complex point z = a + ib lives on the grid (a, b) in
``xgrid.points`` x ``xgrid.points``; flattened index ``ia * N + ib``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .grids import GridSpec, GridSymbol
from .phase_space import SymplecticSpace, chord_map
from .quantize import weyl_quantize


class SetupError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


@dataclass
class BargmannSetup:
    Axx: np.ndarray
    Axy: np.ndarray
    Ayy: np.ndarray
    C: float | None = None
    Phi: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.Axx = np.atleast_2d(np.asarray(self.Axx, complex))
        self.Axy = np.atleast_2d(np.asarray(self.Axy, complex))
        self.Ayy = np.atleast_2d(np.asarray(self.Ayy, complex))
        n = self.n
        if any(M.shape != (n, n) for M in (self.Axx, self.Axy, self.Ayy)):
            raise SetupError("phase blocks must be n x n")
        if abs(np.linalg.det(self.Axy)) < 1e-12:
            raise SetupError("det phi''_xy vanishes")
        if np.linalg.eigvalsh(0.5 * (self.Ayy.imag + self.Ayy.imag.T)).min() <= 0:
            raise SetupError("Im phi''_yy is not positive definite")
        self.Phi = self._phi_matrix()

    @classmethod
    def standard(cls, n: int = 1) -> "BargmannSetup":
        """phi(x, y) = i (x - y)^2 / 2; C is fixed later by the unitarity check."""
        I = np.eye(n)
        return cls(1j * I, -1j * I, 1j * I)

    @property
    def n(self) -> int:
        return self.Axx.shape[0]

    def phase(self, x, y):
        x = np.asarray(x, complex)
        y = np.asarray(y, complex)
        return (0.5 * np.einsum("...i,ij,...j->...", x, self.Axx, x)
                + np.einsum("...i,ij,...j->...", x, self.Axy, y)
                + 0.5 * np.einsum("...i,ij,...j->...", y, self.Ayy, y))

    def _phi_matrix(self) -> np.ndarray:
        """Real symmetric Q on R^{2n} (x = a + ib -> (a, b)) with Phi = v.Q v / 2.

        -Im phi(x, y) is concave in real y; its maximiser solves a linear
        system, which makes Phi an explicit quadratic form.
        """
        n = self.n
        Q = np.zeros((2 * n, 2 * n))
        H = self.Ayy.imag
        for k in range(2 * n):
            for l in range(2 * n):
                e = np.zeros(2 * n)
                e[k] += 1
                f = np.zeros(2 * n)
                f[l] += 1
                Q[k, l] = 0.5 * (self._phi_exact(e + f) - self._phi_exact(e - f))
        return Q

    def _phi_exact(self, v) -> float:
        n = self.n
        x = v[:n] + 1j * v[n:]
        # -Im phi = -Im(x.Axx x)/2 - Im(x.Axy) y - y.Im(Ayy) y / 2
        g = -(x @ self.Axy).imag
        H = self.Ayy.imag
        y = np.linalg.solve(H, g)
        return float(-(0.5 * x @ self.Axx @ x).imag + g @ y - 0.5 * y @ H @ y)

    def weight(self, z) -> np.ndarray:
        """Phi(z) from the stored quadratic form; z complex (..., n)."""
        z = np.asarray(z, complex)
        v = np.concatenate([z.real, z.imag], -1)
        return 0.5 * np.einsum("...i,ij,...j->...", v, self.Phi, v)

    def phi_sup(self, z) -> float:
        """sup_y -Im phi(z, y) by direct numerical maximisation."""
        z = np.asarray(z, complex)
        res = minimize(lambda y: float(self.phase(z, y).imag), np.zeros(self.n),
                       method="BFGS", options={"gtol": 1e-12})
        return float(-res.fun)

    def kappa(self, y, eta):
        """kappa_T(y, -phi'_y) = (x, phi'_x): solve eta = -phi'_y(x, y) for x."""
        y = np.asarray(y, float)
        eta = np.asarray(eta, float)
        rhs = -(eta + y @ self.Ayy.T)
        x = rhs @ np.linalg.inv(self.Axy)
        xi = x @ self.Axx.T + y @ self.Axy.T
        return x, xi

    def iota(self, rho) -> np.ndarray:
        """pi o kappa_T : E -> C^n, rho = (y, eta)."""
        rho = np.asarray(rho, float)
        n = self.n
        return self.kappa(rho[..., :n], rho[..., n:])[0]

    def iota_inv(self, z) -> np.ndarray:
        """Inverse of :meth:`iota` (real-linear)."""
        z = np.asarray(z, complex)
        n = self.n
        M = np.zeros((2 * n, 2 * n))
        for k in range(2 * n):
            e = np.zeros(2 * n)
            e[k] = 1
            w = self.iota(e)
            M[:, k] = np.concatenate([w.real, w.imag])
        v = np.concatenate([z.real, z.imag], -1)
        return v @ np.linalg.inv(M).T

    def dPhi(self, z) -> np.ndarray:
        """(2/i) dPhi/dz at z."""
        z = np.asarray(z, complex)
        n = self.n
        v = np.concatenate([z.real, z.imag], -1)
        grad = v @ self.Phi.T
        # d/dz = (d/da - i d/db) / 2
        return (2 / 1j) * 0.5 * (grad[..., :n] - 1j * grad[..., n:])

    def self_test(self, samples: int = 20, seed: int = 0) -> dict:
        """Check Phi against its sup definition and kappa_T(E) against Lambda_Phi."""
        rng = np.random.default_rng(seed)
        n = self.n
        phi_err = 0.0
        lam_err = 0.0
        for _ in range(samples):
            z = rng.normal(size=n) + 1j * rng.normal(size=n)
            phi_err = max(phi_err, abs(self.weight(z) - self.phi_sup(z)))
            y, eta = rng.normal(size=n), rng.normal(size=n)
            x, xi = self.kappa(y, eta)
            lam_err = max(lam_err, float(np.abs(xi - self.dPhi(x)).max()))
        return {"phi_error": phi_err, "lambda_error": lam_err,
                "ok": phi_err <= 1e-10 and lam_err <= 1e-10}

    def to_json(self):
        enc = lambda M: [[[float(v.real), float(v.imag)] for v in row] for row in M]
        return {"Axx": enc(self.Axx), "Axy": enc(self.Axy), "Ayy": enc(self.Ayy), "C": self.C}


# ------------------------------------------------------------ n = 1 transform
@dataclass
class WeightedGridFunction:
    """e^{-Phi} v sampled on a grid over C^n = R^{2n} (flattened, n = 1: (a, b))."""

    values: np.ndarray
    grid: GridSpec
    n: int = 1

    @property
    def area(self) -> float:
        return self.grid.h ** (2 * self.n)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.area))

    def as_array(self) -> np.ndarray:
        N = self.grid.N
        return self.values.reshape((N, N) * self.n)


def complex_grid(xgrid: GridSpec) -> np.ndarray:
    """Points a + ib of the n = 1 transform grid, flattened as ia * N + ib."""
    a = xgrid.points
    return (a[:, None] + 1j * a[None, :]).ravel()


def weighted_kernel(setup: BargmannSetup, z, y, C: float = 1.0) -> np.ndarray:
    """C e^{i phi(z, y) - Phi(z)} for complex z (Z,) and real y (N,), n = 1."""
    z = np.asarray(z, complex).ravel()
    y = np.asarray(y, float).ravel()
    ph = (0.5 * setup.Axx[0, 0] * z[:, None] ** 2 + setup.Axy[0, 0] * z[:, None] * y[None, :]
          + 0.5 * setup.Ayy[0, 0] * y[None, :] ** 2)
    return C * np.exp(1j * ph - setup.weight(z[:, None])[:, None])


def calibrate(setup: BargmannSetup, xgrid: GridSpec | None = None) -> float:
    """Fix C by ||T u0|| = ||u0|| for the ground state u0 (n = 1)."""
    xgrid = xgrid or GridSpec.balanced(64)
    y = xgrid.points
    u0 = np.pi ** -0.25 * np.exp(-y ** 2 / 2)
    K = weighted_kernel(setup, complex_grid(xgrid), y)
    Tu = K @ u0 * xgrid.h
    nrm = np.sqrt(np.sum(np.abs(Tu) ** 2) * xgrid.h ** 2)
    setup.C = float(1.0 / nrm)
    return setup.C


def _require_C(setup: BargmannSetup) -> float:
    if setup.C is None:
        calibrate(setup)
    return setup.C


def transform_matrix(setup: BargmannSetup, xgrid: GridSpec, z=None) -> np.ndarray:
    """Kw with (e^{-Phi} T u)(z) = h Kw @ u (n = 1)."""
    z = complex_grid(xgrid) if z is None else z
    return weighted_kernel(setup, z, xgrid.points, _require_C(setup))


def check_decay(u, tol: float = 1e-12):
    u = np.asarray(u)
    peak = np.abs(u).max(initial=0.0)
    if peak > 0 and max(abs(u[0]), abs(u[-1])) > tol * peak:
        raise PreconditionError("input does not decay at the position-grid boundary")


def bargmann_transform(u, setup: BargmannSetup, xgrid: GridSpec, tol: float = 1e-12) -> WeightedGridFunction:
    u = np.asarray(u, complex)
    if u.shape != (xgrid.N,):
        raise PreconditionError("samples do not match the position grid")
    check_decay(u, tol)
    K = transform_matrix(setup, xgrid)
    return WeightedGridFunction(K @ u * xgrid.h, xgrid)


def bargmann_adjoint(v: WeightedGridFunction, setup: BargmannSetup, xgrid: GridSpec | None = None) -> np.ndarray:
    """T* v(y) = C int conj(e^{i phi(x, y)}) v(x) e^{-2 Phi(x)} L(dx), from weighted data."""
    xgrid = xgrid or v.grid
    if xgrid != v.grid:
        raise PreconditionError("grid mismatch")
    K = transform_matrix(setup, xgrid)
    return K.conj().T @ v.values * v.area


def conjugate_transform(u, setup: BargmannSetup, xgrid: GridSpec, z) -> np.ndarray:
    """e^{-Phi*(z)} T~u(z) with T~u(y) = C int e^{-i phi*(y, s)} u(s) ds, phi*(y, s) = conj(phi(conj y, s))."""
    z = np.asarray(z, complex).ravel()
    s = xgrid.points
    C = _require_C(setup)
    phis = np.conj(0.5 * setup.Axx[0, 0] * np.conj(z)[:, None] ** 2
                   + setup.Axy[0, 0] * np.conj(z)[:, None] * s[None, :]
                   + 0.5 * setup.Ayy[0, 0] * s[None, :] ** 2)
    w = np.exp(-1j * phis - conj_weight(setup, z)[:, None])
    return C * w @ np.asarray(u, complex) * xgrid.h


def conj_weight(setup: BargmannSetup, z) -> np.ndarray:
    """Phi*(y) = sup_s Im phi*(y, s), computed as Phi at conj(y)."""
    return setup.weight(np.conj(np.asarray(z, complex))[..., None])


def conj_weight_sup(setup: BargmannSetup, z) -> float:
    """Phi*(y) by direct maximisation of Im conj(phi(conj y, s)) over real s."""
    z = complex(np.ravel(z)[0])
    f = lambda s: -float(np.conj(setup.phase(np.array([np.conj(z)]), s)).imag)
    res = minimize(f, np.zeros(1), method="BFGS", options={"gtol": 1e-12})
    return float(-res.fun)


# ------------------------------------------------------------ effective kernel
@dataclass
class EffectiveKernel:
    """K^eff(x, y) = e^{-Phi(x)} K(x, conj y) e^{-Phi(y)} evaluated on demand.

    ``evaluator(zx, zy)`` returns the matrix of values for complex point
    arrays ``zx`` and ``zy``.
    """

    evaluator: object
    setup: BargmannSetup
    xgrid: GridSpec
    label: str = ""

    def __call__(self, zx, zy) -> np.ndarray:
        return self.evaluator(np.asarray(zx, complex).ravel(), np.asarray(zy, complex).ravel())

    def on_E(self, rx, ry) -> np.ndarray:
        """Values at phase-space points of E pulled back through iota_T."""
        return self(self.setup.iota(rx)[..., 0], self.setup.iota(ry)[..., 0])

    def pairs(self, zx, zy) -> np.ndarray:
        """Values at matched pairs (zx[k], zy[k])."""
        zx = np.asarray(zx, complex).ravel()
        zy = np.asarray(zy, complex).ravel()
        out = np.empty(zx.size, complex)
        for s in range(0, zx.size, 512):
            M = self(zx[s:s + 512], zy[s:s + 512])
            out[s:s + 512] = np.diag(M)
        return out


def effective_kernel(a, setup: BargmannSetup, xgrid: GridSpec, label: str = "") -> EffectiveKernel:
    """Effective kernel of a^w through (T (x) T~) applied to the Weyl kernel."""
    if isinstance(a, np.ndarray) and a.ndim == 2 and a.shape == (xgrid.N, xgrid.N) and not callable(a):
        A = a
    else:
        A = weyl_quantize(a, xgrid).matrix
    y = xgrid.points
    C = _require_C(setup)
    h = xgrid.h

    def ev(zx, zy):
        Kx = weighted_kernel(setup, zx, y, C)
        Ky = weighted_kernel(setup, zy, y, C)
        return h * (Kx @ A) @ Ky.conj().T

    return EffectiveKernel(ev, setup, xgrid, label)


def kernel_compose(K1: EffectiveKernel, K2: EffectiveKernel, zgrid=None, chunk: int = 4096) -> EffectiveKernel:
    """K(x, y) = int K1(x, z) K2(z, y) L(dz) by quadrature over the complex grid."""
    if K1.setup is not K2.setup and K1.setup.to_json() != K2.setup.to_json():
        raise PreconditionError("kernels use different Bargmann setups")
    g = K1.xgrid
    z = complex_grid(g) if zgrid is None else np.asarray(zgrid, complex).ravel()
    dA = g.h ** 2

    def ev(zx, zy):
        out = np.zeros((zx.size, zy.size), complex)
        for s in range(0, z.size, chunk):
            zz = z[s:s + chunk]
            out += K1(zx, zz) @ K2(zz, zy)
        return out * dA

    return EffectiveKernel(ev, K1.setup, g, f"({K1.label})o({K2.label})")


def kernel_ratio_sup(K: EffectiveKernel, m, points, interior: float | None = None) -> dict:
    """sup over sampled pairs of |K^eff(x, y)| / m(q(x, y)) with x, y in E.

    ``points`` are phase-space points of E = R^2 (n = 1); all ordered
    pairs are used.
    """
    points = np.asarray(points, float)
    space = SymplecticSpace(K.setup.n)
    z = K.setup.iota(points)[..., 0]
    vals = np.abs(K(z, z))
    X = np.repeat(points[:, None, :], len(points), 1)
    Y = np.repeat(points[None, :, :], len(points), 0)
    mid, chord = chord_map(space, X, Y)
    mq = m(np.concatenate([mid, chord], -1))
    R = vals / mq
    k = np.unravel_index(np.argmax(R), R.shape)
    return {"sup": float(R.max()), "argmax": [points[k[0]].tolist(), points[k[1]].tolist()],
            "pairs": int(R.size)}


# ------------------------------------------------------------ magnetic translations
def admissibility_residual(setup: BargmannSetup, x0, x0s, samples: int = 50, seed: int = 0):
    """max |Im l| on Lambda_Phi for l(x, xi) = x0*.x + x0.xi; returns (value, worst point)."""
    rng = np.random.default_rng(seed)
    n = setup.n
    worst, where = 0.0, None
    for _ in range(samples):
        y, eta = rng.normal(size=n) * 3, rng.normal(size=n) * 3
        x, xi = setup.kappa(y, eta)
        val = abs((np.dot(x0s, x) + np.dot(x0, xi)).imag)
        if val > worst:
            worst, where = val, (y.tolist(), eta.tolist())
    return float(worst), where


def magnetic_identity_residual(setup: BargmannSetup, x0, x0s, z) -> float:
    """max over z of |-Phi(z) + Phi(z + x0) + Re(i x0*.(z + x0/2))|."""
    z = np.asarray(z, complex).reshape(-1, setup.n)
    x0 = np.asarray(x0, complex).reshape(setup.n)
    x0s = np.asarray(x0s, complex).reshape(setup.n)
    r = (-setup.weight(z) + setup.weight(z + x0)
         + np.real(1j * (z + 0.5 * x0) @ x0s))
    return float(np.abs(r).max())


def magnetic_translate(v: WeightedGridFunction, x0, x0s, setup: BargmannSetup,
                       tol: float = 1e-10) -> WeightedGridFunction:
    """(e^{il})^w v(x) = e^{i x0*.(x + x0/2)} v(x + x0) on weighted data (n = 1).

    The shift x0 must be grid-aligned; samples shifted in from outside the
    box are zero.
    """
    x0 = complex(x0)
    x0s = complex(x0s)
    res, where = admissibility_residual(setup, [x0], [x0s])
    if res > tol:
        raise PreconditionError(f"l is not real on Lambda_Phi (|Im l| = {res:.2e} at {where})")
    g = v.grid
    ka, kb = x0.real / g.h, x0.imag / g.h
    if abs(ka - round(ka)) > 1e-9 or abs(kb - round(kb)) > 1e-9:
        raise PreconditionError("shift is not aligned with the complex grid")
    ka, kb = int(round(ka)), int(round(kb))
    z = complex_grid(g)
    N = g.N
    W = v.values.reshape(N, N)
    S = np.zeros_like(W)
    sa = slice(max(0, -ka), min(N, N - ka))
    sb = slice(max(0, -kb), min(N, N - kb))
    ta = slice(max(0, ka), min(N, N + ka))
    tb = slice(max(0, kb), min(N, N + kb))
    S[sa, sb] = W[ta, tb]
    # modulus factor e^{-Phi(z) + Phi(z + x0) + Re(...)} is identically 1
    expo = -setup.weight(z[:, None]) + setup.weight((z + x0)[:, None]) + 1j * x0s * (z + 0.5 * x0)
    return WeightedGridFunction(np.exp(expo) * S.ravel(), g)


def real_side_shift(u, x0, x0s, setup: BargmannSetup, xgrid: GridSpec) -> np.ndarray:
    """Real-side counterpart: (e^{i(t y + s eta)})^w u(y) = e^{it(y + s/2)} u(y + s).

    Valid for the standard setup where an admissible pair has x0 = s + it,
    x0* = t. The shift s must be grid-aligned.
    """
    s, t = complex(x0).real, complex(x0s).real
    k = s / xgrid.h
    if abs(k - round(k)) > 1e-9:
        raise PreconditionError("real shift not grid-aligned")
    k = int(round(k))
    u = np.asarray(u, complex)
    out = np.zeros_like(u)
    N = xgrid.N
    out[max(0, -k):min(N, N - k)] = u[max(0, k):min(N, N + k)]
    return np.exp(1j * t * (xgrid.points + 0.5 * s)) * out


# ------------------------------------------------------------ membership, n = 1 symbols on E = R^2
def tensor_transform(a: GridSymbol, setup: BargmannSetup) -> np.ndarray:
    """(T (x) T) a on C^2, weighted, shape (N^2, N^2) over (z1, z2)."""
    if a.ndim != 2 or a.axes[0] != a.axes[1]:
        raise PreconditionError("tensor transform needs a symbol on a square grid")
    g = a.axes[0]
    K = transform_matrix(setup, g)
    return (g.h ** 2) * (K @ a.values) @ K.T


def membership_via_bargmann(a: GridSymbol, m, setup: BargmannSetup, radii=None, B=None,
                            boundary_tol: float = 1e-8):
    """sup of e^{-Phi}|T a| / m(iota^{-1}) over the C^2 grid (or a [B]-norm)."""
    from .symbol_class import _make_report, default_radii, check_boundary

    check_boundary(a, boundary_tol)
    g = a.axes[0]
    W = tensor_transform(a, setup)
    z = complex_grid(g)
    r = setup.iota_inv(z[:, None])                   # (Z, 2): (y, eta)
    Z = z.size
    # phase-space point (x1, x2, x1*, x2*) for the pair (z1, z2)
    P = np.empty((Z, Z, 4))
    P[..., 0] = r[:, None, 0]
    P[..., 1] = r[None, :, 0]
    P[..., 2] = r[:, None, 1]
    P[..., 3] = r[None, :, 1]
    ratios = (np.abs(W) / m(P)).ravel()
    pts = P.reshape(-1, 4)
    norm = ratios.max(initial=0.0)
    agg = "sup"
    extra = {}
    if B is not None:
        from .bspaces import AmalgamSpec, amalgam_norm
        spec = B if isinstance(B, AmalgamSpec) else AmalgamSpec(B)
        N = g.N
        norm = amalgam_norm(ratios.reshape(N, N, N, N), [g] * 4, spec)
        agg = f"[{spec.B}]"
        extra["B"] = spec.to_json()
    trunc = float(np.linalg.norm(pts, axis=1).max())
    return _make_report("bargmann", pts, ratios, norm, agg, radii or default_radii(a.axes), trunc,
                        extra)
