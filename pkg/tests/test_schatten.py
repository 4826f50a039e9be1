import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from phasecalc.order_functions import OrderFunctionError, bracket, constant, product
from phasecalc.phase_space import Lattice
from phasecalc.schatten import (TriangleViolation, box_diagonal_bound, cp_norm, diagonal_cp_bound,
                                lattice_sum, lp_norm, majorant_matrix, single_diagonal,
                                verify_matrix_hypothesis)

M33 = product(bracket(1, -3, block="x"), bracket(1, -3, block="xstar"))


def test_cp_norm_diagonal():
    D = np.diag([1.0, 2.0, 3.0])
    assert cp_norm(D, 1) == pytest.approx(6.0)
    assert cp_norm(D, 2) == pytest.approx(np.sqrt(14.0))
    assert cp_norm(D, np.inf) == pytest.approx(3.0)
    assert cp_norm(np.zeros((3, 3)), 1) == 0.0
    with pytest.raises(ValueError):
        cp_norm(D, 0.5)


def test_cp_norm_unitary_invariance():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    Q = np.linalg.qr(rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)))[0]
    for p in (1, 2, 3, np.inf):
        assert cp_norm(Q @ A @ Q.conj().T, p) == pytest.approx(cp_norm(A, p), rel=1e-12)
    assert cp_norm(A, 2) == pytest.approx(np.linalg.norm(A), rel=1e-12)


@given(arrays(complex, st.integers(1, 12), elements=st.complex_numbers(max_magnitude=10,
                                                                        allow_nan=False)),
       st.integers(-6, 6), st.sampled_from([1.0, 1.5, 2.0, 4.0, np.inf]))
def test_single_diagonal_matches_sequence(v, shift, p):
    M = single_diagonal(v, shift)
    assert M.shape == (v.size + abs(shift),) * 2
    assert cp_norm(M, p) == pytest.approx(lp_norm(v, p), rel=1e-12, abs=1e-300)


@given(st.floats(1, 6), st.floats(1, 6))
def test_cp_monotone_in_p(p, q):
    A = np.random.default_rng(3).normal(size=(5, 5))
    lo, hi = sorted((p, q))
    assert cp_norm(A, hi) <= cp_norm(A, lo) * (1 + 1e-12)


def test_lattice_sum_closed_form():
    f = lambda g: 1 / ((1 + g[:, 0] ** 2) * (1 + g[:, 1] ** 2))
    r = lattice_sum(f, Lattice.scaled(2), -1)
    assert r.finite and abs(r.value / (np.pi / np.tanh(np.pi)) ** 2 - 1) <= 1e-4
    assert not lattice_sum(f, Lattice.scaled(2), 0).finite


def test_diagonal_bound_sup_case():
    # p = inf: sum over chords of sup_alpha <J^-1 delta>^-3 = sum_k <k>^-3
    R = 400
    k = np.arange(-R, R + 1)
    # tail outside the square |k|_inf <= R + 1/2 of the integral of r^-3 is 4 sqrt(2) / (R + 1/2)
    direct = np.sum((1 + k[:, None] ** 2 + k[None, :] ** 2) ** -1.5) + 4 * np.sqrt(2) / (R + 0.5)
    for m in (M33, bracket(1, -3, block="xstar")):
        b = diagonal_cp_bound(m, Lattice.scaled(2), np.inf)
        assert b.finite and abs(b.value / direct - 1) <= 1e-4


def test_diagonal_bound_values():
    vals = {p: diagonal_cp_bound(M33, Lattice.scaled(2), p).value for p in (1, 2, np.inf)}
    assert vals[1] == pytest.approx(39.8239, rel=1e-4)
    assert vals[1] >= vals[2] >= vals[np.inf]


def test_diagonal_bound_infinite():
    for m in (constant(1), bracket(1, -3, block="x")):
        assert not diagonal_cp_bound(m, Lattice.scaled(2), 1).finite
    assert not diagonal_cp_bound(bracket(1, -3, block="xstar"), Lattice.scaled(2), 1).finite
    with pytest.raises(ValueError):
        diagonal_cp_bound(M33, Lattice.scaled(2), 0.5)
    with pytest.raises(OrderFunctionError):
        diagonal_cp_bound(M33, Lattice.scaled(4), 1)


def test_box_bound_is_triangle_inequality():
    env, pts = majorant_matrix(M33, Lattice.scaled(2), 3.0)
    rng = np.random.default_rng(0)
    for p in (1, 2, np.inf):
        bb = box_diagonal_bound(env, pts, Lattice.scaled(2), p)
        M = env * rng.uniform(size=env.shape)
        assert cp_norm(M, p) <= bb * (1 + 1e-12)


@pytest.mark.parametrize("scale", [1.0, 1.5])
@pytest.mark.parametrize("p", [1.0, 2.0, np.inf])
def test_matrix_hypothesis_two_lattices(p, scale):
    # the raw ratio moves with the lattice; only finiteness and the bound are lattice-free
    r = verify_matrix_hypothesis(M33, Lattice.scaled(2, scale), p, radius=4.0, trials=3)
    assert np.isfinite(r.bound) and np.isfinite(r.box_bound)
    assert 0 < r.ratio <= 1 + 1e-8 and r.box_bound <= r.bound * (1 + 1e-6)


def test_matrix_hypothesis_infinite():
    with pytest.raises(OrderFunctionError):
        verify_matrix_hypothesis(constant(1), Lattice.scaled(2), 1)
    assert issubclass(TriangleViolation, AssertionError)


def test_symbol_cp_trace_bound(grid48, unit_windows):
    from phasecalc.families import TRACE_CLASS
    from phasecalc.grids import GridSymbol
    from phasecalc.schatten import symbol_cp_check
    fam, W = unit_windows
    diag = diagonal_cp_bound(M33, Lattice.scaled(2), 1)
    a = GridSymbol.from_function(TRACE_CLASS["s1.0"], (grid48, grid48))
    r = symbol_cp_check(a, M33, 1, fam, ops=W, diag=diag, constant=0.096)
    assert r.measured <= r.bound and r.within
