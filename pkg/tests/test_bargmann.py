import numpy as np
import pytest
from hypothesis import given, strategies as st

from phasecalc import bargmann as bg
from phasecalc.acceptance import hermite_function
from phasecalc.families import gaussian
from phasecalc.grids import GridSpec, GridSymbol
from phasecalc.order_functions import bracket
from phasecalc.quantize import moyal_product

# frozen from scripts/oracles.py (closed form 2^-1/2 pi^-3/4, dblquad agrees to 7e-15)
C_ORACLE = 0.2996557375766119
COHERENT_PEAK = 0.3989422804014327


@pytest.fixture(scope="module")
def g64():
    return GridSpec.balanced(64)


def test_setup_validation():
    with pytest.raises(bg.SetupError):
        bg.BargmannSetup(1j, 0.0, 1j)
    with pytest.raises(bg.SetupError):
        bg.BargmannSetup(1j, -1j, -1j)
    with pytest.raises(bg.SetupError):
        bg.BargmannSetup(np.eye(2), np.eye(2), 1j * np.eye(3))


def test_self_test(bargmann_setup):
    rep = bargmann_setup.self_test()
    assert rep["ok"] and rep["phi_error"] <= 1e-10


def test_calibrated_constant(bargmann_setup):
    assert abs(bargmann_setup.C / C_ORACLE - 1) <= 1e-10


@given(st.lists(st.floats(-5, 5), min_size=2, max_size=2))
def test_iota_round_trip(rho):
    S = bg.BargmannSetup.standard(1)
    r = np.array(rho)
    assert np.allclose(S.iota_inv(S.iota(r)), r, atol=1e-12)


@given(st.floats(-4, 4), st.floats(-4, 4))
def test_weight_matches_sup(a, b):
    S = bg.BargmannSetup.standard(1)
    z = np.array([a + 1j * b])
    assert abs(S.weight(z) - S.phi_sup(z)) <= 1e-8 * (1 + abs(S.weight(z)))


def test_unitarity_hermite(bargmann_setup, g64):
    for k in range(5):
        u = hermite_function(k, g64.points)
        Tu = bg.bargmann_transform(u, bargmann_setup, g64)
        assert abs(Tu.norm() / np.linalg.norm(u * np.sqrt(g64.h)) - 1) <= 1e-8
        back = bg.bargmann_adjoint(Tu, bargmann_setup)
        assert np.linalg.norm(back - u) / np.linalg.norm(u) <= 1e-8


def test_orthogonality_preserved(bargmann_setup, g64):
    T = [bg.bargmann_transform(hermite_function(k, g64.points), bargmann_setup, g64) for k in range(3)]
    ip = np.vdot(T[0].values, T[2].values) * T[0].area
    assert abs(ip) <= 1e-8


def test_coherent_state_decay(bargmann_setup, g64):
    z = bg.complex_grid(g64)
    Tu = bg.bargmann_transform(hermite_function(0, g64.points), bargmann_setup, g64)
    ref = COHERENT_PEAK * np.exp(-np.abs(z) ** 2 / 4)
    assert np.abs(np.abs(Tu.values) - ref).max() <= 1e-10
    # fitted Gaussian exponent
    r = np.abs(z)
    sel = (r > 0.5) & (r < 5)
    slope = np.polyfit(r[sel] ** 2, np.log(np.abs(Tu.values[sel])), 1)[0]
    assert abs(-slope - 0.25) <= 1e-6


def test_decay_precondition(bargmann_setup, g64):
    with pytest.raises(bg.PreconditionError):
        bg.bargmann_transform(np.ones(g64.N), bargmann_setup, g64)
    with pytest.raises(bg.PreconditionError):
        bg.bargmann_transform(np.zeros(g64.N + 1), bargmann_setup, g64)


def test_conjugate_transform_standard(bargmann_setup, g64):
    # for the standard phase the conjugate transform has the same weighted kernel
    u = hermite_function(1, g64.points) + 0.3j * hermite_function(2, g64.points)
    z = bg.complex_grid(g64)[::37]
    Tu = bg.bargmann_transform(u, bargmann_setup, g64).values[::37]
    assert np.abs(bg.conjugate_transform(u, bargmann_setup, g64, z) - Tu).max() <= 1e-12


def test_magnetic_identity_and_norm(bargmann_setup, g64):
    z = bg.complex_grid(g64)
    Tu = bg.bargmann_transform(hermite_function(0, g64.points), bargmann_setup, g64)
    for s, t in [(3, -2), (0, 5), (-4, 0)]:
        x0, x0s = g64.h * (s + 1j * t), g64.h * t
        assert bg.magnetic_identity_residual(bargmann_setup, x0, x0s, z) <= 1e-10
        v = bg.magnetic_translate(Tu, x0, x0s, bargmann_setup)
        assert abs(v.norm() / Tu.norm() - 1) <= 1e-8


def test_magnetic_intertwines_real_shift(bargmann_setup, g64):
    u = hermite_function(1, g64.points) + 0.3 * hermite_function(2, g64.points)
    Tu = bg.bargmann_transform(u, bargmann_setup, g64)
    for s, t in [(4, -3), (0, 2), (3, 0)]:
        x0, x0s = g64.h * (s + 1j * t), g64.h * t
        v = bg.magnetic_translate(Tu, x0, x0s, bargmann_setup)
        w = bg.bargmann_transform(bg.real_side_shift(u, x0, x0s, bargmann_setup, g64), bargmann_setup, g64)
        assert np.abs(v.values - w.values).max() <= 1e-7


def test_magnetic_preconditions(bargmann_setup, g64):
    Tu = bg.bargmann_transform(hermite_function(0, g64.points), bargmann_setup, g64)
    with pytest.raises(bg.PreconditionError, match="not real"):
        bg.magnetic_translate(Tu, g64.h, 1.0, bargmann_setup)
    with pytest.raises(bg.PreconditionError, match="aligned"):
        bg.magnetic_translate(Tu, 0.5 * g64.h, 0.0, bargmann_setup)


def test_kernel_compose_matches_moyal(bargmann_setup):
    g = GridSpec.balanced(40)
    ax = (g, g)
    a = GridSymbol.from_function(lambda X, Y: gaussian(X, Y, c=(0.3, 0.0)), ax)
    b = GridSymbol.from_function(lambda X, Y: gaussian(X, Y, s=0.9, e=(0.0, 0.6)), ax)
    pts = np.random.default_rng(1).uniform(-2, 2, 12) + 1j * np.random.default_rng(2).uniform(-2, 2, 12)
    K = bg.kernel_compose(bg.effective_kernel(a, bargmann_setup, g),
                          bg.effective_kernel(b, bargmann_setup, g))(pts, pts)
    ref = bg.effective_kernel(moyal_product(a, b), bargmann_setup, g)(pts, pts)
    assert np.abs(K - ref).max() / np.abs(ref).max() <= 1e-4


def test_kernel_ratio_finite(bargmann_setup):
    g = GridSpec.balanced(48)
    a = GridSymbol.from_function(lambda X, Y: gaussian(X, Y), (g, g))
    P = np.random.default_rng(0).uniform(-3, 3, (40, 2))
    r = bg.kernel_ratio_sup(bg.effective_kernel(a, bargmann_setup, g), bracket(1, -4, block="xstar"), P)
    assert np.isfinite(r["sup"]) and r["pairs"] == 1600


def test_bargmann_membership(bargmann_setup):
    g = GridSpec.balanced(48)
    m = bracket(1, -4, block="xstar")
    a = GridSymbol.from_function(lambda X, Y: gaussian(X, Y), (g, g))
    assert bg.membership_via_bargmann(a, m, bargmann_setup).member
