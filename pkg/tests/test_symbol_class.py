import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phasecalc.bspaces import lp
from phasecalc.families import gaussian
from phasecalc.grids import GridSymbol
from phasecalc.order_functions import bracket
from phasecalc.phase_space import Lattice
from phasecalc.quantize import AliasingError, GridError
from phasecalc.symbol_class import (ConditioningError, WindowError, bspace_stilde_norm,
                                    build_partition, dual_window, partition_residual,
                                    radial_verdict, stft_membership, stilde_norm,
                                    symbol_conditioning, window_operators)

M4 = bracket(1, -4, block="xstar")


def S(g, f):
    return GridSymbol.from_function(f, (g, g))


@pytest.fixture(scope="module")
def fam2():
    return build_partition(Lattice.scaled(2), 1.0)


def test_partition_of_unity():
    cases = ((Lattice.scaled(2), 3.0, 300), (Lattice.scaled(4, 1.5), 0.75, 60),
             (Lattice(np.array([[1.0, 0.4], [0.0, 1.2]])), 1.5, 300))
    for lat, half, n in cases:
        fam = build_partition(lat, 1.0)
        d = lat.dim
        assert partition_residual(fam, -half * np.ones(d), half * np.ones(d), samples=n) < 1e-10


def test_window_value_and_decay():
    fam = build_partition(Lattice.scaled(2), 1.0)
    v0 = fam.chi0(np.zeros(2))
    assert 0 < v0 < 1
    r = np.linspace(0.5, 4, 15)
    vals = fam.chi0(np.stack([r, np.zeros_like(r)], -1))
    c = -np.polyfit(r ** 2, np.log(vals), 1)[0]
    assert c > 0


def test_tiny_width_underflows():
    with pytest.raises(WindowError):
        build_partition(Lattice.scaled(2, 40.0), 0.5)


def test_zero_symbol(grid48, unit_windows, fam2):
    fam, W = unit_windows
    z = S(grid48, lambda X, Y: 0 * X + 0j)
    assert stilde_norm(z, M4, fam, ops=W).norm == 0.0
    assert stft_membership(z, M4, fam2).norm == 0.0


@pytest.mark.parametrize("N", [2, 4])
def test_gaussian_member(grid48, unit_windows, N):
    fam, W = unit_windows
    a = S(grid48, lambda X, Y: np.exp(-(X ** 2 + Y ** 2)) + 0j)
    r = stilde_norm(a, bracket(1, -N, block="xstar"), fam, ops=W)
    assert np.isfinite(r.norm) and r.member


def test_gaussian_member_steep_weight():
    # <r>^6 exp(-r^2/6) peaks near r = 4, between core and shell on the 48 grid
    from phasecalc.grids import GridSpec
    g = GridSpec.balanced(64)
    fam = build_partition(Lattice.scaled(4), 1.0)
    a = S(g, lambda X, Y: np.exp(-(X ** 2 + Y ** 2)) + 0j)
    r = stilde_norm(a, bracket(1, -6, block="xstar"), fam, ops=window_operators(fam, (g, g)))
    assert np.isfinite(r.norm) and r.member


def test_lp_variants_comparable(grid48, unit_windows):
    fam, W = unit_windows
    for kw in ({}, {"s": 0.8}, {"e": (0.8, -0.4)}):
        a = S(grid48, lambda X, Y: gaussian(X, Y, **kw))
        n2 = stilde_norm(a, M4, fam, p=2, ops=W).norm
        ninf = stilde_norm(a, M4, fam, ops=W).norm
        assert 1e-2 <= n2 / ninf <= 1e2


def test_boundary_precondition(grid48, unit_windows):
    fam, W = unit_windows
    with pytest.raises(GridError):
        stilde_norm(S(grid48, lambda X, Y: 1 + 0j * X), M4, fam, ops=W)


def test_norm_axioms(grid48, unit_windows):
    fam, W = unit_windows
    a = S(grid48, lambda X, Y: gaussian(X, Y, c=(0.5, 0.0)))
    b = S(grid48, lambda X, Y: gaussian(X, Y, s=0.8, e=(0.0, 1.0)))
    na, nb = (stilde_norm(x, M4, fam, ops=W).norm for x in (a, b))
    lam = -2.5 + 1j
    nl = stilde_norm(GridSymbol(a.axes, lam * a.values), M4, fam, ops=W).norm
    assert abs(nl - abs(lam) * na) <= 1e-12 * nl
    nab = stilde_norm(GridSymbol(a.axes, a.values + b.values), M4, fam, ops=W).norm
    assert nab <= (na + nb) * (1 + 1e-12)


def test_bspace_variants(grid48, unit_windows):
    fam, W = unit_windows
    a = S(grid48, lambda X, Y: gaussian(X, Y))
    base = stilde_norm(a, M4, fam, ops=W)
    assert bspace_stilde_norm(a, M4, fam, lp(np.inf), ops=W).norm == base.norm
    n1 = bspace_stilde_norm(a, M4, fam, lp(1), ops=W).norm
    assert np.isfinite(n1) and base.norm <= n1


def test_lattice_and_width_independence(grid48, unit_windows):
    fam, W = unit_windows
    ax = (grid48, grid48)
    alts = []
    for lat, w in ((Lattice.scaled(4, 1.5), 1.0), (Lattice.scaled(4), 1.3)):
        f = build_partition(lat, w)
        alts.append((f, window_operators(f, ax)))
    for kw in ({}, {"s": 0.8}, {"e": (1.0, -0.5)}, {"c": (1.0, -0.5)}):
        a = S(grid48, lambda X, Y: gaussian(X, Y, **kw))
        ref = stilde_norm(a, M4, fam, ops=W).norm
        for f, Wf in alts:
            ratio = stilde_norm(a, M4, f, ops=Wf).norm / ref
            assert 1 / 50 <= ratio <= 50


def test_stft_constant_symbol(grid48, fam2):
    one = S(grid48, lambda X, Y: 1 + 0j * X)
    for N in (2, 4, 6):
        r = stft_membership(one, bracket(1, -N, block="xstar"), fam2)
        assert r.member and r.extra["skipped"] > 0


def test_stft_modulation_shift(grid48, fam2):
    g = grid48
    step = 2 * np.pi / (g.N * g.h)
    eta = np.array([3 * step, -2 * step])
    one = S(g, lambda X, Y: 1 + 0j * X)
    mod = S(g, lambda X, Y: np.exp(1j * (eta[0] * X + eta[1] * Y)))
    r0 = stft_membership(one, M4, fam2)
    r = stft_membership(mod, bracket(1, -4, block="xstar", shift=eta), fam2)
    assert r.member and abs(r.norm / r0.norm - 1) < 1e-10


def test_stft_aliasing(grid48, fam2):
    g = grid48
    cb = S(g, lambda X, Y: np.exp(-(X ** 2 + Y ** 2) / 2) + 0j)
    cb = GridSymbol(cb.axes, cb.values * (-1.0) ** np.add.outer(np.arange(g.N), np.arange(g.N)))
    with pytest.raises(AliasingError):
        stft_membership(cb, M4, fam2)


@given(st.lists(st.floats(0, 10), min_size=20, max_size=20), st.floats(0.1, 5))
@settings(max_examples=30)
def test_radial_verdict_scale_invariant(vals, lam):
    pts = np.stack([np.linspace(0, 10, 20), np.zeros(20)], -1)
    r = np.array(vals)
    assert radial_verdict(pts, r, 3.0, 6.0)[0] == radial_verdict(pts, lam * r, 3.0, 6.0)[0]


def test_dual_window(grid48, unit_windows):
    fam, W = unit_windows
    ax = (grid48, grid48)
    dw = dual_window(fam, 0.2, ax, chi_ops=W)
    assert dw.residual <= 1e-6
    a = S(grid48, lambda X, Y: gaussian(X, Y, c=(0.5, -0.3), e=(0.4, 0.0))).values
    rec = dw.apply(a)
    assert np.linalg.norm(rec - a) / np.linalg.norm(a) <= 1e-6


def test_dual_window_ill_conditioned(grid48, unit_windows):
    fam, W = unit_windows
    assert symbol_conditioning(fam, 10.0) > 1e8
    with pytest.raises(ConditioningError):
        dual_window(fam, 10.0, (grid48, grid48), chi_ops=W)
