"""The acceptance checks, one function per criterion.

Every check is deterministic for a fixed seed and returns a
:class:`CriterionResult` with the measured quantities that decided it.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_hermite, factorial

from . import bargmann as bg
from . import bspaces as bs
from .families import MEMBERS, TRACE_CLASS, family, gaussian
from .grids import GridSpec, GridSymbol
from .order_functions import (SeparableSpec, bracket, compose_is_order_function_check,
                              fit_covector_exponent, l1_fiber_certificate, product,
                              separable_compose, separable_order_function)
from .phase_space import Lattice
from .quantize import (LinearForm, composition_error, exp_symbol, exp_symbol_conjugate,
                       exp_symbol_left, exp_symbol_right, exp_symbol_sandwich,
                       moyal_product, moyal_product_poly, weyl_quantize)
from .schatten import cp_norm, diagonal_cp_bound, lp_norm, single_diagonal, symbol_cp_check
from .symbol_class import build_partition, stft_membership, stilde_norm, window_operators


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number:2d}: {self.name}"

    def to_json(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "measured": _clean(self.measured)}


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def hermite_function(k: int, y):
    return eval_hermite(k, y) * np.exp(-y ** 2 / 2) / np.sqrt(2.0 ** k * factorial(k) * np.sqrt(np.pi))


def _setup(grid=None):
    S = bg.BargmannSetup.standard(1)
    bg.calibrate(S, grid or GridSpec.balanced(64))
    return S


# ------------------------------------------------------------------ 1
def moyal_operator_consistency(seed: int = 0, N: int = 48, tol: float = 1e-6,
                               budget: float = 300.0) -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    g = GridSpec.balanced(N)
    errs = []
    for _ in range(10):
        pa = (rng.uniform(-1, 1, 2), rng.uniform(0.8, 1.3), rng.uniform(-1, 1, 2))
        pb = (rng.uniform(-1, 1, 2), rng.uniform(0.8, 1.3), rng.uniform(-1, 1, 2))
        a = GridSymbol.from_function(lambda X, Y: gaussian(X, Y, *pa), (g, g))
        b = GridSymbol.from_function(lambda X, Y: gaussian(X, Y, *pb), (g, g))
        errs.append(composition_error(a, b, g))
    dt = time.perf_counter() - t0
    ok = max(errs) <= tol and dt <= budget
    return CriterionResult(1, "Moyal product matches operator composition", ok,
                           {"max_rel_frobenius": max(errs), "errors": errs, "N": N}, dt)


# ------------------------------------------------------------------ 2
def exponential_oracles(seed: int = 0, N: int = 48, tol: float = 1e-6) -> CriterionResult:
    rng = np.random.default_rng(seed)
    g = GridSpec.balanced(N)
    ax = (g, g)
    step = 2 * np.pi / (N * g.h)
    errs = []
    for k in range(20):
        rule = k % 4
        # the sandwich rule uses e^{il/2}, which must also lie on the frequency lattice
        mult = 2 if rule == 3 else 1
        ell = LinearForm(step * mult * rng.integers(-4 // mult, 4 // mult + 1, 2).astype(float))
        c, s, e = rng.uniform(-1, 1, 2), rng.uniform(0.9, 1.2), rng.uniform(-0.5, 0.5, 2)
        a = GridSymbol.from_function(lambda X, Y: gaussian(X, Y, c, s, e), ax)
        if rule == 0:
            lhs, rhs = moyal_product(exp_symbol(ell, ax), a), exp_symbol_left(ell, a)
        elif rule == 1:
            lhs, rhs = moyal_product(a, exp_symbol(ell, ax)), exp_symbol_right(a, ell)
        elif rule == 2:
            lhs = moyal_product(moyal_product(exp_symbol(ell, ax), a), exp_symbol(ell, ax, -1.0))
            rhs = exp_symbol_conjugate(ell, a)
        else:
            h = exp_symbol(ell, ax, 0.5)
            lhs, rhs = moyal_product(moyal_product(h, a), h), exp_symbol_sandwich(ell, a)
        errs.append(float(np.abs(lhs.values - rhs.values).max()))
    return CriterionResult(2, "exponential-symbol rules agree with the Moyal product",
                           max(errs) <= tol, {"max_sup_error": max(errs)})


# ------------------------------------------------------------------ 3
def x_xi_identity(N: int = 48, tol: float = 1e-8) -> CriterionResult:
    c = moyal_product_poly([[0.0], [1.0]], [[0.0, 1.0]])
    poly_err = float(np.abs(c - np.array([[0.5j, 0], [0, 1]])).max())
    g = GridSpec.balanced(N)
    X = weyl_quantize(lambda x, xi: x + 0 * xi, g).matrix
    Xi = weyl_quantize(lambda x, xi: xi + 0 * x, g).matrix
    XXi = weyl_quantize(lambda x, xi: x * xi, g).matrix
    mat_err = 0.0
    for k in range(5):
        u = hermite_function(k, g.points)
        r = (X @ Xi - XXi) @ u - 0.5j * u
        mat_err = max(mat_err, float(np.linalg.norm(r) / np.linalg.norm(u)))
    return CriterionResult(3, "x # xi = x xi + i/2 by multiplier and matrix routes",
                           poly_err <= tol and mat_err <= tol,
                           {"multiplier_error": poly_err, "matrix_error": mat_err})


# ------------------------------------------------------------------ 4
def bargmann_unitarity(N: int = 64, tol: float = 1e-6) -> CriterionResult:
    g = GridSpec.balanced(N)
    S = _setup(g)
    norm_err, rt_err = 0.0, 0.0
    for k in range(5):
        u = hermite_function(k, g.points)
        Tu = bg.bargmann_transform(u, S, g)
        back = bg.bargmann_adjoint(Tu, S)
        norm_err = max(norm_err, abs(Tu.norm() / np.linalg.norm(u * np.sqrt(g.h)) - 1))
        rt_err = max(rt_err, float(np.linalg.norm(back - u) / np.linalg.norm(u)))
    return CriterionResult(4, "Bargmann transform is unitary with T*T = I",
                           norm_err <= tol and rt_err <= tol,
                           {"norm_error": norm_err, "round_trip_error": rt_err, "C": S.C})


# ------------------------------------------------------------------ 5
def magnetic_translations(seed: int = 0, N: int = 64) -> CriterionResult:
    rng = np.random.default_rng(seed)
    g = GridSpec.balanced(N)
    S = _setup(g)
    z = bg.complex_grid(g)
    u0 = hermite_function(0, g.points)
    Tu = bg.bargmann_transform(u0, S, g)
    res, nerr = 0.0, 0.0
    for _ in range(10):
        s, t = g.h * rng.integers(-6, 7, 2)
        x0, x0s = s + 1j * t, t
        res = max(res, bg.magnetic_identity_residual(S, x0, x0s, z))
        v = bg.magnetic_translate(Tu, x0, x0s, S)
        nerr = max(nerr, abs(v.norm() - Tu.norm()) / Tu.norm())
    return CriterionResult(5, "magnetic translation identity and norm preservation",
                           res <= 1e-10 and nerr <= 1e-8,
                           {"identity_residual": res, "norm_error": nerr})


# ------------------------------------------------------------------ 6
def effective_kernel_stability(seed: int = 0, sizes=(48, 64), band: float = 0.2) -> CriterionResult:
    S = _setup()
    m = bracket(1, -4, block="xstar")
    syms = {k: f for k, f in MEMBERS.items() if k != "zero"}
    syms["modnarrow"] = lambda X, Y: gaussian(X, Y, s=0.8, e=(0.7, 0.7))
    syms["sum3"] = lambda X, Y: (gaussian(X, Y, c=(1, 1)) + gaussian(X, Y, c=(-1, 1), e=(0, 1.0))
                                 - 0.3 * gaussian(X, Y, c=(0, -1)))
    P = np.random.default_rng(seed).uniform(-4, 4, (150, 2))
    out, ok = {}, True
    for name, f in syms.items():
        vals = []
        for N in sizes:
            g = GridSpec.balanced(N)
            a = GridSymbol.from_function(f, (g, g))
            vals.append(bg.kernel_ratio_sup(bg.effective_kernel(a, S, g), m, P)["sup"])
        drift = abs(vals[1] / vals[0] - 1)
        out[name] = {"sup": vals, "drift": drift}
        ok &= bool(np.all(np.isfinite(vals)) and drift <= band)
    return CriterionResult(6, "effective kernel obeys the chord majorant, grid-stable", ok,
                           {"symbols": out, "sizes": list(sizes)})


# ------------------------------------------------------------------ 7
def membership_mode_agreement(N: int = 48) -> CriterionResult:
    g = GridSpec.balanced(N)
    ax = (g, g)
    m = bracket(1, -4, block="xstar")
    fam4 = build_partition(Lattice.scaled(4), 1.0)
    W = window_operators(fam4, ax)
    fam2 = build_partition(Lattice.scaled(2), 1.0)
    S = _setup()
    rows, ok = {}, True
    for name, (f, expected) in family().items():
        a = GridSymbol.from_function(f, ax)
        v = {"lattice": stilde_norm(a, m, fam4, ops=W).member,
             "stft": stft_membership(a, m, fam2).member,
             "bargmann": bg.membership_via_bargmann(a, m, S).member}
        agree = len(set(v.values())) == 1
        rows[name] = {**v, "expected": expected, "agree": agree}
        ok &= agree and v["lattice"] == expected
    return CriterionResult(7, "lattice, STFT and Bargmann membership modes agree", ok,
                           {"family": rows})


# ------------------------------------------------------------------ 8
def composed_order_translate(seed: int = 0) -> CriterionResult:
    m1 = bracket(1, -4, block="xstar")
    m2 = product(bracket(1, -4, block="xstar"), bracket(1, 1, block="x"))
    T = np.random.default_rng(seed).uniform(-3, 3, (20, 4))
    r = compose_is_order_function_check(m1, m2, np.zeros(2), np.zeros(2), T)
    return CriterionResult(8, "composed order function passes the translate test", r.passed,
                           {"measured_constant": r.measured_constant,
                            "constant_bound": r.constant_bound,
                            "exponent_bound": r.exponent_bound,
                            "measured_exponent": r.measured_exponent})


# ------------------------------------------------------------------ 9
def separable_exponents(tol: float = 0.1) -> CriterionResult:
    rows, ok = [], True
    for N1, N2, M1, M2 in [(4, 4, 0, 0), (5, 4, 1, 0), (6, 4, 0, 1)]:
        s1, s2 = SeparableSpec(N1, M1), SeparableSpec(N2, M2)
        d = separable_compose(s1, s2)
        f = fit_covector_exponent(separable_order_function(s1), separable_order_function(s2))
        good = d.strengthened and abs(f.slope - d.exponent) <= tol
        rows.append({"triple": [N1, N2, M1, M2], "predicted": d.exponent, "fitted": f.slope,
                     "ok": good})
        ok &= good
    s = SeparableSpec(2, 0)
    d = separable_compose(s, s)
    f = fit_covector_exponent(separable_order_function(s), separable_order_function(s),
                              reference=d.exponent)
    log_ok = d.log_factor and f.log_slope > 0
    rows.append({"triple": [2, 2, 0, 0], "predicted": d.exponent, "log_factor": d.log_factor,
                 "log_slope": f.log_slope, "ok": log_ok})
    return CriterionResult(9, "separable composition exponents match log-log fits",
                           ok and log_ok, {"cases": rows})


# ------------------------------------------------------------------ 10
def schur_fiber_integral(tol: float = 1e-4) -> CriterionResult:
    r = l1_fiber_certificate(bracket(1, -3, block="xstar"))
    err = abs(r.value / (2 * np.pi) - 1)
    return CriterionResult(10, "integral of <x*>^-3 over the plane equals 2 pi",
                           r.finite and err <= tol, {"value": r.value, "rel_error": err})


# ------------------------------------------------------------------ 11
def single_diagonal_norms(seed: int = 0, tol: float = 1e-12) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(10):
        n = int(rng.integers(3, 30))
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        shift = int(rng.integers(-5, 6))
        M = single_diagonal(v, shift)
        for p in (1, 2, np.inf):
            worst = max(worst, abs(cp_norm(M, p) / lp_norm(v, p) - 1))
    return CriterionResult(11, "single-diagonal Schatten norms equal sequence norms",
                           worst <= tol, {"max_rel_error": worst})


# ------------------------------------------------------------------ 12
def trace_norm_desk_check(N: int = 48, band: float = 0.5) -> CriterionResult:
    g = GridSpec.balanced(N)
    ax = (g, g)
    m = product(bracket(1, -3, block="x"), bracket(1, -3, block="xstar"))
    fam = build_partition(Lattice.scaled(4), 1.0)
    W = window_operators(fam, ax)
    diag = diagonal_cp_bound(m, Lattice.scaled(2), 1)
    ratios = {}
    for name, f in TRACE_CLASS.items():
        a = GridSymbol.from_function(f, ax)
        r = symbol_cp_check(a, m, 1, fam, ops=W, diag=diag)
        ratios[name] = {"measured": r.measured, "stilde": r.stilde, "ratio": r.ratio,
                        "bound_holds": r.measured <= r.bound}
    const = ratios["s1.0"]["ratio"]
    ok = all(v["bound_holds"] and abs(v["ratio"] / const - 1) <= band for v in ratios.values())
    return CriterionResult(12, "trace norm within a stable multiple of the symbol bound", ok,
                           {"constant": const, "diagonal_bound": diag.value, "family": ratios})


# ------------------------------------------------------------------ 13
B_FAMILY = [bs.lp(1), bs.lp(2), bs.lp(3), bs.lp(np.inf), bs.mixed(1, 2), bs.mixed(2, np.inf)]


def bspace_axioms(seed: int = 0, trials: int = 100) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst = {"translation": 0.0, "solidity": 0.0, "embedding": 0.0, "convolution": 0.0}
    for B in B_FAMILY:
        for _ in range(trials):
            u = rng.normal(size=(6, 6)) * (rng.random((6, 6)) < 0.7)
            shift = rng.integers(-3, 4, 2)
            nu = bs.seq_norm(u, B)
            worst["translation"] = max(worst["translation"],
                                       abs(bs.seq_norm(bs.translate(u, shift), B) - nu) / max(nu, 1e-300))
            v = np.abs(u) * rng.uniform(1, 2, u.shape)
            worst["solidity"] = max(worst["solidity"], bs.seq_norm(u, B) - bs.seq_norm(v, B))
            nB = bs.seq_norm(u, B)
            worst["embedding"] = max(worst["embedding"], np.abs(u).max() - nB,
                                     nB - np.abs(u).sum())
            f = rng.normal(size=(3, 3))
            r = bs.convolve_bound_check(f, u, B)
            worst["convolution"] = max(worst["convolution"], r.ratio - 1)
    # padding reorders floating-point sums, so "exact" means up to roundoff
    axioms_ok = (worst["translation"] <= 1e-13 and worst["solidity"] <= 0.0
                 and worst["embedding"] <= 1e-12 and worst["convolution"] <= 1e-12)
    verdicts = {}
    for B, Bt in [(bs.lp(1), bs.lp(2)), (bs.lp(2), bs.lp(1)), (bs.lp(2), bs.lp(np.inf)),
                  (bs.lp(np.inf), bs.lp(2))]:
        v3 = bs.precedes_check(B, Bt, N=3, seed=seed).verdict
        v5 = bs.precedes_check(B, Bt, N=5, seed=seed).verdict
        verdicts[f"{B} < {Bt}"] = [v3, v5]
    same = all(a == b for a, b in verdicts.values())
    return CriterionResult(13, "sequence-space axioms and precedence verdicts",
                           axioms_ok and same, {"worst": worst, "precedes": verdicts})


# ------------------------------------------------------------------ 14
def kernel_composition(seed: int = 0, N: int = 48, tol: float = 1e-4) -> CriterionResult:
    rng = np.random.default_rng(seed)
    g = GridSpec.balanced(N)
    S = _setup()
    ax = (g, g)
    pts = rng.uniform(-3, 3, 40) + 1j * rng.uniform(-3, 3, 40)
    worst = 0.0
    for pa, pb in [(((0, 0), 1.0, (0, 0)), ((0.5, 0), 1.0, (0, 0.7))),
                   (((-0.5, 0.3), 0.9, (0.4, 0)), ((0.2, -0.4), 1.1, (-0.3, 0.5)))]:
        a = GridSymbol.from_function(lambda X, Y: gaussian(X, Y, *pa), ax)
        b = GridSymbol.from_function(lambda X, Y: gaussian(X, Y, *pb), ax)
        K = bg.kernel_compose(bg.effective_kernel(a, S, g), bg.effective_kernel(b, S, g))(pts, pts)
        ref = bg.effective_kernel(moyal_product(a, b), S, g)(pts, pts)
        worst = max(worst, float(np.abs(K - ref).max() / np.abs(ref).max()))
    return CriterionResult(14, "kernel composition agrees with the Moyal route",
                           worst <= tol, {"max_rel_sup": worst})


CRITERIA = [moyal_operator_consistency, exponential_oracles, x_xi_identity, bargmann_unitarity,
            magnetic_translations, effective_kernel_stability, membership_mode_agreement,
            composed_order_translate, separable_exponents, schur_fiber_integral,
            single_diagonal_norms, trace_norm_desk_check, bspace_axioms, kernel_composition]


def run(numbers=None, seed: int = 0, log=None) -> list:
    """Run the selected criteria (all by default) in order."""
    out = []
    for k, fn in enumerate(CRITERIA, start=1):
        if numbers and k not in numbers:
            continue
        t0 = time.perf_counter()
        kw = {"seed": seed} if "seed" in fn.__code__.co_varnames else {}
        res = fn(**kw)
        res.seconds = time.perf_counter() - t0
        if log:
            log(res.line() + f" ({res.seconds:.1f}s)")
        out.append(res)
    return out
