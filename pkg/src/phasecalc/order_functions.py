"""Order functions built from bracket powers, their certificates and calculus.

An order function is ``c * prod_i <A_i rho + b_i>^{p_i}`` on E (dimension 2n)
or on E x E* (dimension 4n, coordinates ``(x, x*)``).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .phase_space import SymplecticSpace, chord_map
from .quadrature import (AffineAtom, AffineProduct, QuadResult, integrate,
                         integrate_product, power_counting_degree, sup_product)

DOMAINS = ("E", "ExE*")


class OrderFunctionError(ValueError):
    pass


class DivergenceError(ArithmeticError):
    """An integral defining an order function or certificate diverges."""


# --------------------------------------------------------------------- tree
@dataclass(frozen=True)
class BracketPower:
    """<A rho + b>^p."""

    A: np.ndarray
    b: np.ndarray
    p: float

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if b.shape[0] != A.shape[0]:
            raise OrderFunctionError("affine offset length does not match matrix rows")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and math.isfinite(self.p)):
            raise OrderFunctionError("non-finite atom data")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "p", float(self.p))

    @property
    def in_dim(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True)
class Product:
    factors: tuple


@dataclass(frozen=True)
class Constant:
    c: float

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c > 0):
            raise OrderFunctionError(f"constants must be positive and finite, got {self.c}")


def _flatten(node, atoms, consts):
    if isinstance(node, BracketPower):
        atoms.append(node)
    elif isinstance(node, Constant):
        consts.append(node.c)
    elif isinstance(node, Product):
        for f in node.factors:
            _flatten(f, atoms, consts)
    else:
        raise OrderFunctionError(f"unknown node {node!r}")


def _node_to_json(node):
    if isinstance(node, BracketPower):
        return {"atom": {"exponent": node.p,
                         "affine": {"matrix": node.A.tolist(), "offset": node.b.tolist()}}}
    if isinstance(node, Constant):
        return {"constant": node.c}
    return {"product": [_node_to_json(f) for f in node.factors]}


def _node_from_json(obj):
    if not isinstance(obj, dict) or len(obj) != 1:
        raise OrderFunctionError(f"expected a single-key node, got {obj!r}")
    (key, val), = obj.items()
    if key == "atom":
        aff = val["affine"]
        return BracketPower(np.asarray(aff["matrix"], float), np.asarray(aff["offset"], float),
                            float(val["exponent"]))
    if key == "constant":
        return Constant(float(val))
    if key == "product":
        return Product(tuple(_node_from_json(v) for v in val))
    raise OrderFunctionError(f"unknown node type {key!r}")


@dataclass
class Certificate:
    C0: float
    N0: float

    def to_json(self):
        return {"C0": self.C0, "N0": self.N0}


@dataclass
class OrderFunction:
    """Order function given by an expression tree.

    Parameters
    ----------
    expr : BracketPower | Product | Constant
    n : int
        Spatial dimension of the underlying R^n.
    domain : {"E", "ExE*"}
    """

    expr: object
    n: int = 1
    domain: str = "ExE*"
    certificate: Certificate = field(init=False)

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise OrderFunctionError(f"domain must be one of {DOMAINS}")
        atoms, consts = [], []
        _flatten(self.expr, atoms, consts)
        for a in atoms:
            if a.in_dim != self.dim:
                raise OrderFunctionError(
                    f"atom acts on dimension {a.in_dim}, domain {self.domain} has {self.dim}")
        self._atoms = atoms
        self._const = float(np.prod(consts)) if consts else 1.0
        self.certificate = self._symbolic_certificate()

    # ---------------------------------------------------------- structure
    @property
    def dim(self) -> int:
        return 2 * self.n if self.domain == "E" else 4 * self.n

    @property
    def atoms(self):
        return list(self._atoms)

    @property
    def constant(self) -> float:
        return self._const

    def _symbolic_certificate(self) -> Certificate:
        C0, N0 = 1.0, 0.0
        for a in self._atoms:
            if not np.any(a.A) or a.p == 0:
                continue
            norm = np.linalg.norm(a.A, 2)
            # <A r + b> <= sqrt(2) max(1, |A|) <r - m> <A m + b>
            C0 *= (math.sqrt(2.0) * max(1.0, norm)) ** abs(a.p)
            N0 += abs(a.p)
        return Certificate(C0, max(1.0, N0))

    def depends_on(self, block: slice) -> bool:
        return any(np.any(a.A[:, block]) and a.p != 0 for a in self._atoms)

    @property
    def x_block(self) -> slice:
        return slice(0, self.dim // 2)

    @property
    def xstar_block(self) -> slice:
        return slice(self.dim // 2, self.dim)

    # ---------------------------------------------------------- evaluation
    def __call__(self, rho) -> np.ndarray:
        return evaluate(self, rho)

    def restrict(self, P: np.ndarray, r: np.ndarray, power: float = 1.0) -> AffineProduct:
        """The function t -> m(P t + r)^power as an :class:`AffineProduct`."""
        P = np.asarray(P, float)
        r = np.asarray(r, float)
        atoms = [AffineAtom(a.A @ P, a.A @ r + a.b, a.p * power) for a in self._atoms]
        return AffineProduct(P.shape[1], atoms, self._const ** power)

    def scaled(self, c: float) -> "OrderFunction":
        return OrderFunction(Product((Constant(c), self.expr)), self.n, self.domain)

    def __mul__(self, other: "OrderFunction") -> "OrderFunction":
        if (self.n, self.domain) != (other.n, other.domain):
            raise OrderFunctionError("domain mismatch in product")
        return OrderFunction(Product((self.expr, other.expr)), self.n, self.domain)

    # ---------------------------------------------------------- json
    def to_json(self) -> dict:
        return {"n": self.n, "domain": self.domain, "expr": _node_to_json(self.expr)}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, obj) -> "OrderFunction":
        if isinstance(obj, str):
            obj = json.loads(obj)
        if "expr" in obj:
            expr = _node_from_json(obj["expr"])
            return cls(expr, int(obj.get("n", 1)), obj.get("domain", "ExE*"))
        expr = _node_from_json(obj)
        atoms, _ = [], []
        _flatten(expr, atoms, _)
        dims = {a.in_dim for a in atoms}
        if len(dims) > 1:
            raise OrderFunctionError("atoms disagree on the domain dimension")
        dim = dims.pop() if dims else 4
        if dim % 4 == 0:
            return cls(expr, dim // 4, "ExE*")
        if dim % 2 == 0:
            return cls(expr, dim // 2, "E")
        raise OrderFunctionError(f"odd domain dimension {dim}")


def evaluate(m: OrderFunction, rho) -> np.ndarray:
    """Value of ``m`` at one point or a stack of points (last axis = coordinates)."""
    rho = np.asarray(rho, dtype=float)
    if rho.shape[-1] != m.dim:
        raise OrderFunctionError(f"point has {rho.shape[-1]} coordinates, domain needs {m.dim}")
    out = np.full(rho.shape[:-1], m.constant)
    for a in m.atoms:
        y = rho @ a.A.T + a.b
        out = out * (1.0 + np.einsum("...i,...i->...", y, y)) ** (0.5 * a.p)
    return out


# ------------------------------------------------------------ constructors
def bracket(n: int, p: float, domain: str = "ExE*", block: str = "all",
            shift=None) -> OrderFunction:
    """<(selected coordinates) - shift>^p.

    ``block`` selects "all", "x" (first half) or "xstar" (second half)
    of the domain coordinates.
    """
    dim = 2 * n if domain == "E" else 4 * n
    half = dim // 2
    if block == "all":
        A = np.eye(dim)
    elif block == "x":
        A = np.eye(dim)[:half]
    elif block == "xstar":
        A = np.eye(dim)[half:]
    else:
        raise OrderFunctionError(f"unknown block {block!r}")
    b = np.zeros(A.shape[0]) if shift is None else -np.asarray(shift, float)
    return OrderFunction(BracketPower(A, b, p), n, domain)


def constant(n: int, c: float = 1.0, domain: str = "ExE*") -> OrderFunction:
    return OrderFunction(Constant(c), n, domain)


def product(*ms: OrderFunction) -> OrderFunction:
    out = ms[0]
    for m in ms[1:]:
        out = out * m
    return out


# ------------------------------------------------------------ certificates
@dataclass
class SweepReport:
    C0: float
    N0: float
    max_ratio: float
    passed: bool
    samples: int
    worst_pair: tuple | None = None

    def to_json(self):
        return {"C0": self.C0, "N0": self.N0, "max_ratio": self.max_ratio,
                "passed": self.passed, "samples": self.samples,
                "worst_pair": None if self.worst_pair is None
                else [list(map(float, v)) for v in self.worst_pair]}


def certify_order_axiom(m: OrderFunction, samples: int = 100_000, radius: float = 50.0,
                        seed: int = 0, chunk: int = 20_000) -> SweepReport:
    """Cross-check the symbolic certificate by a randomised sweep of pairs.

    Pairs are drawn uniformly in the ball of the given radius, half of them
    as near pairs (|rho - mu| <= 2), where the ratio is typically largest
    relative to the bracket factor.
    """
    rng = np.random.default_rng(seed)
    cert = m.certificate
    worst, worst_pair = 0.0, None
    done = 0
    while done < samples:
        k = min(chunk, samples - done)
        rho = _ball(rng, k, m.dim, radius)
        mu = _ball(rng, k, m.dim, radius)
        near = rng.random(k) < 0.5
        mu[near] = rho[near] + _ball(rng, int(near.sum()), m.dim, 2.0)
        d = rho - mu
        ratio = evaluate(m, rho) / ((1.0 + np.sum(d * d, axis=1)) ** (0.5 * cert.N0) * evaluate(m, mu))
        i = int(np.argmax(ratio))
        if ratio[i] > worst:
            worst, worst_pair = float(ratio[i]), (rho[i], mu[i])
        done += k
    passed = worst <= cert.C0 * (1.0 + 1e-12)
    return SweepReport(cert.C0, cert.N0, worst, passed, samples, worst_pair)


def _ball(rng, k, dim, radius):
    v = rng.standard_normal((k, dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    r = radius * rng.random(k) ** (1.0 / dim)
    return v * r[:, None]


# ------------------------------------------------------------ composition
def sigma_parametrization(space: SymplecticSpace, z, zs):
    """Affine maps x -> (x, x*) and x -> (y, y*) parametrising Sigma(z, z*).

    Solving the three defining constraints for (x*, y, y*) gives
        x* = z* - 2J(x - z),  y = x + J z*/2,  y* = 2J(x - z).
    Returns ``(P1, r1, P2, r2)`` with (x, x*) = P1 x + r1, (y, y*) = P2 x + r2.
    """
    n2 = space.d
    J = space.J
    z = np.asarray(z, float)
    zs = np.asarray(zs, float)
    I = np.eye(n2)
    P1 = np.vstack([I, -2.0 * J])
    r1 = np.concatenate([np.zeros(n2), zs + 2.0 * J @ z])
    P2 = np.vstack([I, 2.0 * J])
    r2 = np.concatenate([0.5 * J @ zs, -2.0 * J @ z])
    return P1, r1, P2, r2


def _check_pair(m1: OrderFunction, m2: OrderFunction):
    for m in (m1, m2):
        if m.domain != "ExE*":
            raise OrderFunctionError("composition needs order functions on E x E*")
    if m1.n != m2.n:
        raise OrderFunctionError("order functions live on different dimensions")


def compose_integrand(m1: OrderFunction, m2: OrderFunction, z, zs) -> AffineProduct:
    """x -> m1(x, x*) m2(y, y*) along Sigma(z, z*)."""
    _check_pair(m1, m2)
    space = SymplecticSpace(m1.n)
    P1, r1, P2, r2 = sigma_parametrization(space, z, zs)
    f1 = m1.restrict(P1, r1)
    f2 = m2.restrict(P2, r2)
    return AffineProduct(space.d, f1.atoms + f2.atoms, f1.const * f2.const)


def compose(m1: OrderFunction, m2: OrderFunction, z, zs, rel_tol: float = 1e-8,
            raise_on_divergence: bool = False, **quad) -> QuadResult:
    """Order function of a Weyl composition, evaluated at (z, z*).

    Integrates m1(x, x*) m2(y, y*) dx over the affine set Sigma(z, z*),
    parametrised by x. Divergence is decided from exponents and returned
    as a result with ``finite=False`` (or raised on request).
    """
    res = integrate_product(compose_integrand(m1, m2, z, zs), rel_tol=rel_tol, **quad)
    if not res.finite and raise_on_divergence:
        raise DivergenceError(f"composition integral diverges (degree {res.degree})")
    if res.finite and not res.converged:
        raise DivergenceError("composition quadrature did not converge across refinements")
    return res


def kernel_form_compose(m1: OrderFunction, m2: OrderFunction, xt, yt, **quad) -> QuadResult:
    """The chord-kernel integral of m1(q(xt, zt)) m2(q(zt, yt)) d zt."""
    _check_pair(m1, m2)
    space = SymplecticSpace(m1.n)
    d = space.d
    I = np.eye(d)
    Ji = space.J_inv
    xt = np.asarray(xt, float)
    yt = np.asarray(yt, float)
    # q(xt, zt) = ((xt + zt)/2, J^{-1}(zt - xt))
    P1 = np.vstack([0.5 * I, Ji])
    r1 = np.concatenate([0.5 * xt, -Ji @ xt])
    P2 = np.vstack([0.5 * I, -Ji])
    r2 = np.concatenate([0.5 * yt, Ji @ yt])
    f1 = m1.restrict(P1, r1)
    f2 = m2.restrict(P2, r2)
    return integrate_product(AffineProduct(d, f1.atoms + f2.atoms, f1.const * f2.const), **quad)


def kernel_form_jacobian(n: int) -> float:
    """Constant relating the chord-kernel integral to the Sigma integral.

    With zt the kernel variable, x = (xt + zt)/2 so dzt = 2^{2n} dx.
    """
    return 2.0 ** (2 * n)


@dataclass
class TranslateReport:
    base_value: float
    exponent_bound: float
    constant_bound: float
    measured_constant: float
    measured_exponent: float
    passed: bool
    worst_translate: list | None = None

    def to_json(self):
        return dict(self.__dict__)


def compose_is_order_function_check(m1: OrderFunction, m2: OrderFunction, z, zs,
                                    translates, **quad) -> TranslateReport:
    """Check m3(z+t, z*+t*) <= C <(t, t*)>^{2 N0} m3(z, z*) on given translates.

    The admissible constant follows from the order-function certificates of
    m1 and m2: C = C0(m1) C0(m2) (sqrt(5)/2)^{N0(m2)}, the last factor from
    <t + J t*/2> <= (sqrt(5)/2) <(t, t*)>.
    """
    base = compose(m1, m2, z, zs, raise_on_divergence=True, **quad).value
    c1, c2 = m1.certificate, m2.certificate
    N0 = max(c1.N0, c2.N0)
    Cb = c1.C0 * c2.C0 * (math.sqrt(5.0) / 2.0) ** c2.N0
    worst_c, worst_e, worst_t = 0.0, -np.inf, None
    d = 2 * m1.n
    for tt in np.atleast_2d(translates):
        t, ts = tt[:d], tt[d:]
        val = compose(m1, m2, np.asarray(z) + t, np.asarray(zs) + ts,
                      raise_on_divergence=True, **quad).value
        br = math.sqrt(1.0 + float(tt @ tt))
        c = val / (br ** (2 * N0) * base)
        if c > worst_c:
            worst_c, worst_t = c, tt.tolist()
        if br > 1.0 + 1e-12:
            worst_e = max(worst_e, math.log(val / base) / math.log(br))
    return TranslateReport(base, 2 * N0, Cb, worst_c, worst_e,
                           worst_c <= Cb * (1 + 1e-6), worst_t)


# ------------------------------------------------------------ separable case
@dataclass
class SeparableSpec:
    """m(x, x*) = mt(x) <x*>^{-N} with mt of position growth exponent M."""

    N: float
    M: float = 0.0

    def __post_init__(self):
        if self.M < 0:
            raise OrderFunctionError("position growth exponent M must be >= 0")


@dataclass
class BoundDescriptor:
    exponent: float
    log_factor: bool
    strengthened: bool
    position_factor: str = "mt1 * mt2"

    def to_json(self):
        return dict(self.__dict__)


def separable_compose(s1: SeparableSpec, s2: SeparableSpec, n: int = 1) -> BoundDescriptor:
    """Closed-form covector exponent of the composed separable order function."""
    if -(s1.N + s2.N) + s1.M + s2.M >= -2 * n:
        raise DivergenceError(
            f"-(N1+N2)+M1+M2 = {-(s1.N + s2.N) + s1.M + s2.M} is not < -2n = {-2 * n}")
    a1 = -s2.N + s1.M
    a2 = -s1.N + s2.M
    inner1 = a2 + 2 * n
    inner2 = a1 + 2 * n
    strengthened = a1 < -2 * n and a2 < -2 * n
    if strengthened:
        exponent = max(a1, a2)
    else:
        exponent = max(a1 + max(inner1, 0.0), a2 + max(inner2, 0.0))
    log_flag = inner1 == 0 or inner2 == 0
    return BoundDescriptor(float(exponent), bool(log_flag), bool(strengthened))


def as_separable(m: OrderFunction):
    """Recognise m = mt(x) <x*>^{-N} and return its :class:`SeparableSpec`, else None."""
    if m.domain != "ExE*":
        return None
    xs = m.xstar_block
    xb = m.x_block
    N, M = None, 0.0
    half = m.dim // 2
    for a in m.atoms:
        if a.p == 0 or not np.any(a.A):
            continue
        on_x = np.any(a.A[:, xb])
        on_xs = np.any(a.A[:, xs])
        if on_x and on_xs:
            return None
        if on_xs:
            if N is not None or a.A.shape[0] != half or not np.allclose(a.A[:, xs], np.eye(half)) \
                    or np.any(a.b):
                return None
            N = -a.p
        else:
            M += abs(a.p)
    if N is None:
        N = 0.0
    return SeparableSpec(N, M)


# ------------------------------------------------------------ L2 / Cp certificates
@dataclass
class SchurReport:
    row_sup: float
    column_sup: float
    finite: bool
    row_argmax: list | None = None
    column_argmax: list | None = None

    def to_json(self):
        return dict(self.__dict__)


def _chord_row(m: OrderFunction, fixed, which: str):
    """Affine map of the free variable into q(x, y) with the other fixed."""
    space = SymplecticSpace(m.n)
    d = space.d
    I = np.eye(d)
    Ji = space.J_inv
    fixed = np.asarray(fixed, float)
    if which == "row":        # x fixed, integrate over y
        P = np.vstack([0.5 * I, Ji])
        r = np.concatenate([0.5 * fixed, -Ji @ fixed])
    else:                     # y fixed, integrate over x
        P = np.vstack([0.5 * I, -Ji])
        r = np.concatenate([0.5 * fixed, Ji @ fixed])
    return P, r


def schur_certificate(m: OrderFunction, radius: float = 6.0, samples: int = 13,
                      **quad) -> SchurReport:
    """Row and column suprema of the chord kernel M(x, y) = m(q(x, y)).

    The supremum over the fixed variable is taken on a sample grid of the
    given radius followed by a coordinate refinement around the best node.
    """
    if m.domain != "ExE*":
        raise OrderFunctionError("Schur certificate needs m on E x E*")
    d = 2 * m.n
    P, r = _chord_row(m, np.zeros(d), "row")
    if power_counting_degree(m.restrict(P, r))[0] >= 0:
        return SchurReport(np.inf, np.inf, False)
    out = {}
    for which in ("row", "column"):
        def val(pt):
            P, r = _chord_row(m, pt, which)
            return integrate_product(m.restrict(P, r), **quad).value
        if not m.depends_on(m.x_block):
            best_pt = np.zeros(d)
            best = val(best_pt)
        else:
            g = np.linspace(-radius, radius, samples)
            grid = np.stack(np.meshgrid(*[g] * d, indexing="ij"), -1).reshape(-1, d) \
                if d <= 2 else np.vstack([np.zeros(d), np.eye(d) * radius / 2, -np.eye(d) * radius / 2])
            vals = np.array([val(pt) for pt in grid])
            best_pt = grid[int(np.argmax(vals))]
            best = float(vals.max())
            step = (g[1] - g[0]) / 2 if d <= 2 else radius / 4
            while step > 1e-3:
                improved = False
                for k in range(d):
                    for s in (-step, step):
                        cand = best_pt.copy()
                        cand[k] += s
                        v = val(cand)
                        if v > best:
                            best, best_pt, improved = v, cand, True
                if not improved:
                    step /= 2
        out[which] = (best, best_pt.tolist())
    return SchurReport(out["row"][0], out["column"][0], True, out["row"][1], out["column"][1])


def l1_fiber_certificate(m: OrderFunction, **quad) -> QuadResult:
    """Integral of m(x*) over E* for an x-independent order function."""
    if m.domain != "ExE*":
        raise OrderFunctionError("fiber certificate needs m on E x E*")
    if m.depends_on(m.x_block):
        raise OrderFunctionError("order function depends on x; fiber certificate needs m = m(x*)")
    d = 2 * m.n
    P = np.vstack([np.zeros((d, d)), np.eye(d)])
    return integrate_product(m.restrict(P, np.zeros(2 * d)), **quad)


def cp_criterion_integral(m: OrderFunction, p: float, **quad) -> QuadResult:
    """Outer integral over x* of the L^p(E) norm of m(., x*).

    Exact factorisation is used when every atom depends on x alone or on
    x* alone; otherwise the inner norm is integrated numerically inside the
    outer quadrature.
    """
    if p < 1:
        raise OrderFunctionError("p must be >= 1")
    if m.domain != "ExE*":
        raise OrderFunctionError("criterion needs m on E x E*")
    d = 2 * m.n
    xb, xs = m.x_block, m.xstar_block
    mixed = [a for a in m.atoms if np.any(a.A[:, xb]) and np.any(a.A[:, xs]) and a.p != 0]
    Px = np.vstack([np.eye(d), np.zeros((d, d))])
    Pxs = np.vstack([np.zeros((d, d)), np.eye(d)])
    zero = np.zeros(2 * d)
    if not mixed:
        x_atoms = [a for a in m.atoms if np.any(a.A[:, xb])]
        xs_atoms = [a for a in m.atoms if not np.any(a.A[:, xb])]
        fx = AffineProduct(d, [AffineAtom(a.A[:, xb], a.b, a.p) for a in x_atoms], 1.0)
        fxs = AffineProduct(d, [AffineAtom(a.A[:, xs], a.b, a.p) for a in xs_atoms], m.constant)
        inner = _lp_norm(fx, p, **quad)
        if not np.isfinite(inner):
            return QuadResult(np.inf, False, np.inf)
        outer = integrate_product(fxs, **quad)
        if not outer.finite:
            return outer
        outer.value *= inner
        outer.tail_estimate *= inner
        return outer

    # mixed atoms: nested quadrature, decay degree from the worst fibre
    def inner_at(xstar):
        return _lp_norm(m.restrict(Px, np.concatenate([np.zeros(d), xstar])), p, **quad)

    probe = inner_at(np.zeros(d))
    if not np.isfinite(probe):
        return QuadResult(np.inf, False, np.inf)
    # outer decay: bound each mixed atom from below by its x*-only part
    outer_prod = m.restrict(Pxs, zero)
    deg, _ = power_counting_degree(outer_prod)
    if deg >= 0:
        return QuadResult(np.inf, False, deg)
    f = lambda X: np.array([inner_at(v) for v in X])
    return integrate(f, d, deg, outer_prod.centers(), rel_tol=1e-5, order=6)


def _lp_norm(f: AffineProduct, p: float, **quad) -> float:
    if math.isinf(p):
        val, _ = sup_product(f)
        return val
    res = integrate_product(f.scaled(p), **quad)
    return res.value ** (1.0 / p) if res.finite else np.inf


def separable_order_function(spec: SeparableSpec, n: int = 1) -> OrderFunction:
    """<x>^M <x*>^{-N} as an order function on E x E*."""
    parts = [bracket(n, -spec.N, block="xstar")]
    if spec.M:
        parts.append(bracket(n, spec.M, block="x"))
    return product(*parts)


@dataclass
class ExponentFit:
    slope: float
    intercept: float
    radii: list
    values: list
    log_slope: float | None = None

    def to_json(self):
        return dict(self.__dict__)


def fit_covector_exponent(m1: OrderFunction, m2: OrderFunction, radii=None, direction=None,
                          reference: float | None = None, **quad) -> ExponentFit:
    """Log-log slope of z* -> (m1 o m2)(0, z*) along a ray.

    With ``reference`` the slope of value / <z*>^reference against ln <z*>
    is also reported; a positive value exposes a logarithmic factor.
    """
    n = m1.n
    radii = np.geomspace(10.0, 100.0, 6) if radii is None else np.asarray(radii, float)
    e = np.ones(2 * n) / math.sqrt(2 * n) if direction is None else np.asarray(direction, float)
    e = e / np.linalg.norm(e)
    z = np.zeros(2 * n)
    vals = np.array([compose(m1, m2, z, r * e, raise_on_divergence=True, **quad).value for r in radii])
    br = np.sqrt(1.0 + radii ** 2)
    slope, icpt = np.polyfit(np.log(br), np.log(vals), 1)
    log_slope = None
    if reference is not None:
        log_slope = float(np.polyfit(np.log(br), vals / br ** reference, 1)[0])
    return ExponentFit(float(slope), float(icpt), radii.tolist(), vals.tolist(), log_slope)
