"""Discrete Weyl quantization, the Moyal product, and exponential-symbol rules.

Conventions (n = 1 unless stated): a symbol a(x, xi) is sampled on a
:class:`~phasecalc.grids.GridSymbol` with axes ``(x-grid, xi-grid)``. An
operator acts on samples over a position :class:`~phasecalc.grids.GridSpec`;
the matrix includes the quadrature weight h so that it acts as the
discretised integral operator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import count

import numpy as np
from scipy import special

from .grids import GridSpec, GridSymbol
from .phase_space import hamilton_matrix

_ids = count()


class GridError(ValueError):
    """Symbol grid cannot support the requested operation."""


class AliasingError(GridError):
    pass


@dataclass
class WeylOperator:
    matrix: np.ndarray
    grid: GridSpec
    n: int = 1
    symbol_id: str = field(default_factory=lambda: f"symbol-{next(_ids)}")

    def __matmul__(self, other: "WeylOperator") -> np.ndarray:
        return self.matrix @ other.matrix

    @property
    def is_hermitian(self) -> bool:
        return bool(np.allclose(self.matrix, self.matrix.conj().T, atol=1e-12))


@dataclass(frozen=True)
class LinearForm:
    """l(rho) = rho . covector on E (length 2n)."""

    covector: tuple

    @property
    def c(self) -> np.ndarray:
        return np.asarray(self.covector, float)

    @property
    def n(self) -> int:
        return len(self.covector) // 2

    def hamilton_vector(self) -> np.ndarray:
        """H_l = J grad l as a constant vector on E."""
        return hamilton_matrix(self.n) @ self.c

    def __call__(self, *coords):
        return sum(ci * xi for ci, xi in zip(self.c, coords))


def phase_space_axes(xgrid: GridSpec):
    """Symbol axes matched to a position grid: (x-grid, its DFT frequency grid)."""
    return (xgrid, xgrid.dual())


# ------------------------------------------------------------ interpolation
def _fourier_eval_matrix(ax: GridSpec, pts: np.ndarray) -> np.ndarray:
    """Matrix E with (E @ v)(p) = band-limited periodic interpolant of v at p."""
    N = ax.N
    k = np.fft.fftfreq(N, d=1.0 / N)          # integers, -N/2 included once
    theta = 2 * np.pi * (np.asarray(pts, float)[:, None] + ax.L) / (2 * ax.L)
    phase = np.exp(1j * theta * k[None, :])
    nyq = np.argmin(k)                         # index of -N/2
    phase[:, nyq] = np.cos(theta[:, 0] * (N // 2))
    F = np.fft.fft(np.eye(N), axis=0) / N      # coefficient map
    return phase @ F


def trig_interpolate(sym: GridSymbol, *pts) -> np.ndarray:
    """Evaluate the band-limited interpolant of ``sym`` on the tensor grid ``pts``."""
    if len(pts) != sym.ndim:
        raise GridError("need one point array per axis")
    out = sym.values
    for k, (ax, p) in enumerate(zip(sym.axes, pts)):
        E = _fourier_eval_matrix(ax, p)
        out = np.moveaxis(np.tensordot(E, np.moveaxis(out, k, 0), axes=(1, 0)), 0, k)
    return out


def shift_symbol(sym: GridSymbol, shift) -> np.ndarray:
    """Samples of rho -> a(rho + shift) by spectral (band-limited) translation."""
    shift = np.asarray(shift, float)
    vals = np.fft.fftn(sym.values)
    for k, (ax, s) in enumerate(zip(sym.axes, shift)):
        if abs(s) > 0.5 * ax.L:
            raise GridError(f"shift {s} exceeds the grid margin {0.5 * ax.L} on axis {k}")
        f = 2 * np.pi * np.fft.fftfreq(ax.N, d=ax.h)
        ph = np.exp(1j * f * s)
        if ax.N % 2 == 0:
            ph[ax.N // 2] = np.cos(f[ax.N // 2] * s)
        shape = [1] * sym.ndim
        shape[k] = ax.N
        vals = vals * ph.reshape(shape)
    return np.fft.ifftn(vals)


# ------------------------------------------------------------ quantization
def _tau_grid(xgrid: GridSpec, oversample: int = 2):
    # spacing 2 pi / (oversample * N h) keeps the discrete kernel periodic
    # only in chords longer than the box, so corners do not wrap around
    N, h = xgrid.N, xgrid.h
    M = oversample * N
    kk = np.arange(-M // 2, M // 2 + 1)
    tau = 2 * np.pi * kk / (M * h)
    w = np.ones(M + 1)
    w[0] = w[-1] = 0.5
    return kk, tau, w


def weyl_quantize(a, xgrid: GridSpec, n: int = 1) -> WeylOperator:
    """Matrix of a^w on the position grid.

    The kernel (2 pi)^{-n} int e^{i(x-y)tau} a((x+y)/2, tau) dtau is summed
    with the trapezoid rule on [-pi/h, pi/h] at twice the DFT resolution
    (end points carry weight 1/2), and multiplied by h^n. Constant symbols
    give exactly the identity and real symbols give Hermitian matrices.

    Parameters
    ----------
    a : GridSymbol or callable
        For n = 1 a GridSymbol on (x, xi) axes or a callable a(x, xi).
        For n = 2 a callable a(x1, x2, xi1, xi2).
    """
    if n == 1:
        return _quantize_1d(a, xgrid)
    if n == 2:
        return _quantize_2d(a, xgrid)
    raise NotImplementedError("desk-scale quantization supports n = 1, 2")


def _midpoint_values(a, xgrid: GridSpec, tau):
    N, h = xgrid.N, xgrid.h
    mids = -xgrid.L + 0.5 * h * np.arange(2 * N - 1)
    if isinstance(a, GridSymbol):
        if a.ndim != 2:
            raise GridError("n = 1 symbols need two axes")
        ax, axi = a.axes
        if mids.min() < -ax.L - 1e-12 or mids.max() > ax.L + 1e-12:
            raise GridError("symbol x-axis does not cover the midpoints of the position grid")
        if tau.max() > axi.L * (1 + 1e-12) + 1e-12 and axi.L < tau.max() - axi.h:
            raise GridError("symbol xi-axis does not reach the Nyquist frequency of the position grid")
        return trig_interpolate(a, mids, tau)
    M, T = np.meshgrid(mids, tau, indexing="ij")
    return np.broadcast_to(np.asarray(a(M, T), dtype=complex), M.shape)


def _quantize_1d(a, xgrid: GridSpec) -> WeylOperator:
    N = xgrid.N
    kk, tau, w = _tau_grid(xgrid)
    M = len(kk) - 1
    A = _midpoint_values(a, xgrid, tau)                    # (2N-1, M+1)
    m = np.arange(-(N - 1), N)
    E = np.exp(2j * np.pi * np.outer(kk, m) / M) * w[:, None] / M
    F = A @ E                                              # (2N-1, 2N-1): [i+j, i-j+N-1]
    i = np.arange(N)[:, None]
    j = np.arange(N)[None, :]
    return WeylOperator(F[i + j, i - j + N - 1], xgrid, 1)


def _quantize_2d(a, xgrid: GridSpec) -> WeylOperator:
    N, h = xgrid.N, xgrid.h
    x = xgrid.points
    kk, tau, w = _tau_grid(xgrid)
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    X1, X2 = X1.ravel(), X2.ravel()
    M1 = 0.5 * (X1[:, None] + X1[None, :])
    M2 = 0.5 * (X2[:, None] + X2[None, :])
    D1 = X1[:, None] - X1[None, :]
    D2 = X2[:, None] - X2[None, :]
    K = np.zeros(M1.shape, complex)
    dtau = tau[1] - tau[0]
    for t1, w1 in zip(tau, w):
        for t2, w2 in zip(tau, w):
            K += w1 * w2 * np.exp(1j * (D1 * t1 + D2 * t2)) * a(M1, M2, t1, t2)
    K *= (dtau / (2 * np.pi)) ** 2 * h ** 2
    return WeylOperator(K, xgrid, 2)


def weyl_quantize_separable(a1, a2, xgrid: GridSpec) -> np.ndarray:
    """(a1(x1, xi1) a2(x2, xi2))^w = a1^w (x) a2^w as a Kronecker product."""
    return np.kron(weyl_quantize(a1, xgrid).matrix, weyl_quantize(a2, xgrid).matrix)


# ------------------------------------------------------------ Moyal product
def _dual_freqs(ax: GridSpec):
    return 2 * np.pi * np.fft.fftfreq(ax.N, d=ax.h)


def spectral_tail_fraction(sym: GridSymbol, frac: float = 0.75) -> float:
    """Share of spectral energy beyond ``frac`` of the Nyquist frequency on any axis."""
    S = np.abs(np.fft.fftn(sym.values)) ** 2
    tot = S.sum()
    if tot == 0:
        return 0.0
    mask = np.zeros(S.shape, bool)
    for k, ax in enumerate(sym.axes):
        f = np.abs(_dual_freqs(ax)) > frac * ax.nyquist
        shape = [1] * sym.ndim
        shape[k] = ax.N
        mask |= f.reshape(shape)
    return float(S[mask].sum() / tot)


def moyal_product(a: GridSymbol, b: GridSymbol, memory_budget: float = 2e9,
                  alias_tol: float = 1e-8) -> GridSymbol:
    """Weyl composition a # b through the exact Fourier multiplier.

    Forms a(x) b(y) on E x E, multiplies its 4n-dimensional transform by
    exp((i/2) sigma(zeta, eta)) and restricts to the diagonal y = x.
    """
    if not a.same_grid(b):
        raise GridError("Moyal product needs both symbols on the same grid")
    if a.ndim != 2:
        raise NotImplementedError("grid Moyal product is implemented for n = 1")
    nbytes = 16.0 * a.values.size * b.values.size * 3
    if nbytes > memory_budget:
        raise MemoryError(f"Moyal tensor needs ~{nbytes / 1e9:.1f} GB > budget "
                          f"{memory_budget / 1e9:.1f} GB")
    for s in (a, b):
        tail = spectral_tail_fraction(s)
        if tail > alias_tol:
            raise AliasingError(f"symbol spectrum not resolved: tail energy fraction {tail:.2e}")
    fx, fxi = (_dual_freqs(ax) for ax in a.axes)
    A = np.fft.fft2(a.values)
    B = np.fft.fft2(b.values)
    # sigma(zeta, eta) = zeta_xi * eta_x - zeta_x * eta_xi
    phase = 0.5 * (fxi[None, :, None, None] * fx[None, None, :, None]
                   - fx[:, None, None, None] * fxi[None, None, None, :])
    T = A[:, :, None, None] * B[None, None, :, :] * np.exp(1j * phase)
    t = np.fft.ifftn(T)
    del T
    N0, N1 = a.values.shape
    i = np.arange(N0)[:, None]
    j = np.arange(N1)[None, :]
    return GridSymbol(a.axes, t[i, j, i, j], a.domain)


def moyal_product_poly(pa, pb, n: int = 1) -> np.ndarray:
    """Exact a # b for polynomial symbols (n = 1).

    ``pa[i, j]`` is the coefficient of x^i xi^j. The multiplier series
    exp((i/2)(d_x d_eta - d_xi d_y)) terminates on polynomials.
    """
    from numpy.polynomial import polynomial as P
    from scipy.signal import convolve2d

    if n != 1:
        raise NotImplementedError
    pa = np.atleast_2d(np.asarray(pa, complex))
    pb = np.atleast_2d(np.asarray(pb, complex))
    deg = sum(pa.shape) + sum(pb.shape)
    out = np.zeros((pa.shape[0] + pb.shape[0] - 1, pa.shape[1] + pb.shape[1] - 1), complex)
    for k in range(deg + 1):
        for j in range(k + 1):
            # (d_x^j d_xi^{k-j} a) (d_eta^j d_y^{k-j} b)
            da = P.polyder(P.polyder(pa, j, axis=0), k - j, axis=1) if pa.shape[0] > j and pa.shape[1] > k - j else None
            db = P.polyder(P.polyder(pb, k - j, axis=0), j, axis=1) if pb.shape[0] > k - j and pb.shape[1] > j else None
            if da is None or db is None:
                continue
            coef = (0.5j) ** k * (-1) ** (k - j) * special.comb(k, j) / math.factorial(k)
            term = convolve2d(da, db)
            out[:term.shape[0], :term.shape[1]] += coef * term
    return out


def poly_eval(c, x, xi):
    from numpy.polynomial import polynomial as P
    return P.polyval2d(x, xi, c)


# ------------------------------------------------------------ exponential symbols
def _phase(ell: LinearForm, sym: GridSymbol, scale: float = 1.0):
    mesh = sym.mesh()
    return np.exp(1j * scale * ell(*mesh))


def exp_symbol_left(ell: LinearForm, a: GridSymbol) -> GridSymbol:
    """e^{il} # a = e^{il} a(. + H_l / 2)."""
    H = ell.hamilton_vector()
    return GridSymbol(a.axes, _phase(ell, a) * shift_symbol(a, 0.5 * H), a.domain)


def exp_symbol_right(a: GridSymbol, ell: LinearForm) -> GridSymbol:
    """a # e^{il} = e^{il} a(. - H_l / 2)."""
    H = ell.hamilton_vector()
    return GridSymbol(a.axes, _phase(ell, a) * shift_symbol(a, -0.5 * H), a.domain)


def exp_symbol_conjugate(ell: LinearForm, a: GridSymbol) -> GridSymbol:
    """e^{il} # a # e^{-il} = a(. + H_l)."""
    H = ell.hamilton_vector()
    return GridSymbol(a.axes, shift_symbol(a, H), a.domain)


def exp_symbol_sandwich(ell: LinearForm, a: GridSymbol) -> GridSymbol:
    """e^{il/2} # a # e^{il/2} = e^{il} a."""
    return GridSymbol(a.axes, _phase(ell, a) * a.values, a.domain)


def exp_symbol(ell: LinearForm, axes, scale: float = 1.0) -> GridSymbol:
    """Samples of e^{i scale l} on the given axes."""
    sym = GridSymbol(axes, np.zeros(tuple(ax.N for ax in axes)))
    return GridSymbol(axes, _phase(ell, sym, scale))


def on_frequency_lattice(ell: LinearForm, axes, scale: float = 1.0) -> bool:
    """True if e^{i scale l} is a single DFT mode of the grid (periodic exactly)."""
    for c, ax in zip(ell.c * scale, axes):
        step = 2 * np.pi / (ax.N * ax.h)
        if abs(c / step - round(c / step)) > 1e-9:
            return False
    return True


def composition_error(a: GridSymbol, b: GridSymbol, xgrid: GridSpec | None = None) -> float:
    """Relative Frobenius gap between (a # b)^w and a^w b^w."""
    xgrid = xgrid or a.axes[0]
    A = weyl_quantize(a, xgrid).matrix
    B = weyl_quantize(b, xgrid).matrix
    C = weyl_quantize(moyal_product(a, b), xgrid).matrix
    AB = A @ B
    return float(np.linalg.norm(C - AB) / max(np.linalg.norm(AB), 1e-300))


def moyal_convergence(fa, fb, sizes=(24, 32, 40, 48)) -> list:
    """Composition error of callables ``fa``, ``fb`` on balanced grids of growing N."""
    rows = []
    for N in sizes:
        g = GridSpec.balanced(N)
        a = GridSymbol.from_function(fa, (g, g))
        b = GridSymbol.from_function(fb, (g, g))
        try:
            err = composition_error(a, b, g)
        except AliasingError as exc:
            rows.append({"N": N, "L": g.L, "error": None, "note": str(exc)})
            continue
        rows.append({"N": N, "L": g.L, "error": err})
    return rows
