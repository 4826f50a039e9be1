import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phasecalc.families import gaussian
from phasecalc.grids import GridSpec, GridSymbol
from phasecalc.quantize import (AliasingError, GridError, LinearForm, composition_error,
                                exp_symbol, exp_symbol_conjugate, exp_symbol_left,
                                exp_symbol_right, exp_symbol_sandwich, moyal_product,
                                moyal_product_poly, on_frequency_lattice, poly_eval,
                                shift_symbol, trig_interpolate, weyl_quantize)

G32 = GridSpec.balanced(32)
coord = st.floats(-1.0, 1.0)
width = st.floats(0.8, 1.3)


def sym(g, **kw):
    return GridSymbol.from_function(lambda X, Y: gaussian(X, Y, **kw), (g, g))


def test_identity_symbol_gives_identity(grid48):
    one = GridSymbol.from_function(lambda X, Y: 1 + 0 * X, (grid48, grid48))
    assert np.abs(weyl_quantize(one, grid48).matrix - np.eye(48)).max() < 1e-12


def test_position_symbol_is_diagonal(grid48):
    X = weyl_quantize(lambda x, xi: x + 0 * xi, grid48).matrix
    assert np.abs(X - np.diag(grid48.points)).max() < 1e-10


def test_gaussian_kernel_closed_form(grid48):
    g = grid48
    A = weyl_quantize(lambda x, xi: np.exp(-(x ** 2 + xi ** 2) / 2), g).matrix
    Xg, Yg = np.meshgrid(g.points, g.points, indexing="ij")
    K = (2 * np.pi) ** -0.5 * np.exp(-((Xg + Yg) / 2) ** 2 / 2 - (Xg - Yg) ** 2 / 2) * g.h
    assert np.abs(A - K).max() < 1e-12


@given(coord, coord, width, coord, coord)
@settings(max_examples=15)
def test_adjoint_is_quantized_conjugate(c1, c2, s, e1, e2):
    a = sym(G32, c=(c1, c2), s=s, e=(e1, e2))
    A = weyl_quantize(a, G32).matrix
    Ac = weyl_quantize(GridSymbol(a.axes, np.conj(a.values)), G32).matrix
    assert np.abs(A.conj().T - Ac).max() < 1e-12


@given(coord, coord, width)
@settings(max_examples=15)
def test_real_symbols_are_hermitian(c1, c2, s):
    a = GridSymbol.from_function(lambda X, Y: np.exp(-((X - c1) ** 2 + (Y - c2) ** 2) / (2 * s * s)),
                                 (G32, G32))
    assert weyl_quantize(a, G32).is_hermitian


@given(coord, coord, width, coord)
@settings(max_examples=10)
def test_unit_is_neutral_for_moyal(c1, c2, s, e1):
    a = sym(G32, c=(c1, c2), s=s, e=(e1, 0.0))
    one = GridSymbol.from_function(lambda X, Y: 1 + 0 * X, (G32, G32))
    assert np.abs(moyal_product(one, a).values - a.values).max() < 1e-10
    assert np.abs(moyal_product(a, one).values - a.values).max() < 1e-10


@pytest.mark.parametrize("s,t", [(0.5, 0.5), (0.3, 0.7), (1.0, 0.25)])
def test_gaussian_moyal_closed_form(grid48, s, t):
    g = grid48
    a = GridSymbol.from_function(lambda X, Y: np.exp(-s * (X ** 2 + Y ** 2)) + 0j, (g, g))
    b = GridSymbol.from_function(lambda X, Y: np.exp(-t * (X ** 2 + Y ** 2)) + 0j, (g, g))
    ref = np.exp(-(s + t) / (1 + s * t) * (a.mesh()[0] ** 2 + a.mesh()[1] ** 2)) / (1 + s * t)
    assert np.abs(moyal_product(a, b).values - ref).max() < 1e-9


def test_gaussian_moyal_oracle_point():
    # frozen from scripts/oracles.py (quadrature of the integral form)
    g = GridSpec(8.0, 64)
    pts = (np.array([0.4]), np.array([-0.2]))
    a = GridSymbol.from_function(lambda X, Y: np.exp(-0.3 * (X ** 2 + Y ** 2)) + 0j, (g, g))
    b = GridSymbol.from_function(lambda X, Y: np.exp(-0.7 * (X ** 2 + Y ** 2)) + 0j, (g, g))
    v = trig_interpolate(moyal_product(a, b), *pts)
    assert abs(v[0] - 0.7005359347490293) < 1e-8


def test_moyal_composition_error_small(grid48):
    a = sym(grid48, c=(0.3, -0.2), e=(0.5, 0.0))
    b = sym(grid48, s=0.9, c=(-0.4, 0.1), e=(0.0, -0.6))
    assert composition_error(a, b) < 1e-6


def test_x_xi_series():
    c = moyal_product_poly([[0.0], [1.0]], [[0.0, 1.0]])
    assert np.array_equal(c, np.array([[0.5j, 0], [0, 1]]))
    assert poly_eval(c, 2.0, 3.0) == 6.0 + 0.5j
    # xi # x = x xi - i/2
    c2 = moyal_product_poly([[0.0, 1.0]], [[0.0], [1.0]])
    assert np.array_equal(c2, np.array([[-0.5j, 0], [0, 1]]))


def test_x_xi_matrix_route(grid48):
    g = grid48
    X = weyl_quantize(lambda x, xi: x + 0 * xi, g).matrix
    Xi = weyl_quantize(lambda x, xi: xi + 0 * x, g).matrix
    XXi = weyl_quantize(lambda x, xi: x * xi, g).matrix
    u = np.exp(-g.points ** 2 / 2)
    assert np.abs((X @ Xi - XXi) @ u - 0.5j * u).max() < 1e-8


def test_exponential_rules(grid48):
    g = grid48
    ax = (g, g)
    step = 2 * np.pi / (g.N * g.h)
    ell = LinearForm((2 * step, -2 * step))
    assert on_frequency_lattice(ell, ax) and on_frequency_lattice(ell, ax, 0.5)
    a = sym(g, c=(0.2, 0.1), e=(0.3, -0.2))
    e, em, eh = exp_symbol(ell, ax), exp_symbol(ell, ax, -1.0), exp_symbol(ell, ax, 0.5)
    pairs = [(moyal_product(e, a), exp_symbol_left(ell, a)),
             (moyal_product(a, e), exp_symbol_right(a, ell)),
             (moyal_product(moyal_product(e, a), em), exp_symbol_conjugate(ell, a)),
             (moyal_product(moyal_product(eh, a), eh), exp_symbol_sandwich(ell, a))]
    for lhs, rhs in pairs:
        assert np.abs(lhs.values - rhs.values).max() < 1e-10


def test_off_lattice_covector_detected(grid48):
    ell = LinearForm((0.123, 0.0))
    assert not on_frequency_lattice(ell, (grid48, grid48))


def test_checkerboard_aliases(grid48):
    g = grid48
    cb = np.exp(-(g.points[:, None] ** 2 + g.points[None] ** 2) / 2) * (-1.0) ** np.add.outer(
        np.arange(48), np.arange(48))
    a = GridSymbol((g, g), cb + 0j)
    with pytest.raises(AliasingError):
        moyal_product(a, a)


def test_memory_budget(grid48):
    a = sym(grid48)
    with pytest.raises(MemoryError):
        moyal_product(a, a, memory_budget=1e6)


def test_mismatched_grids():
    with pytest.raises(GridError):
        moyal_product(sym(G32), sym(GridSpec.balanced(40)))


def test_shift_beyond_margin(grid48):
    with pytest.raises(GridError):
        shift_symbol(sym(grid48), (grid48.L, 0.0))


def test_trig_interpolation_exact_on_nodes(grid48):
    a = sym(grid48, e=(0.4, 0.2))
    X, Y = a.mesh()
    v = trig_interpolate(a, X[5:9, 7], Y[5:9, 7])
    assert np.abs(v - a.values[5:9, 7]).max() < 1e-12


def test_two_dimensional_quantization_factorises():
    g = GridSpec.balanced(12)
    A = weyl_quantize(lambda x1, x2, t1, t2: np.exp(-(x1 ** 2 + t1 ** 2) / 2 - (x2 ** 2 + t2 ** 2) / 2),
                      g, n=2).matrix
    A1 = weyl_quantize(lambda x, t: np.exp(-(x ** 2 + t ** 2) / 2), g).matrix
    assert np.abs(A - np.kron(A1, A1)).max() < 1e-10
