import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from phasecalc.order_functions import (DivergenceError, OrderFunction, OrderFunctionError,
                                       SeparableSpec, as_separable, bracket, certify_order_axiom,
                                       compose, compose_is_order_function_check, constant,
                                       fit_covector_exponent, kernel_form_compose,
                                       kernel_form_jacobian, l1_fiber_certificate, product,
                                       separable_compose, separable_order_function)
from phasecalc.phase_space import SymplecticSpace, chord_map

pt4 = arrays(float, 4, elements=st.floats(-30, 30))
exps = st.sampled_from([-4.0, -3.0, -1.5, 1.0, 2.0])
blocks = st.sampled_from(["all", "x", "xstar"])


@given(pt4, pt4, exps, exps, blocks, blocks)
def test_certificate_bounds_ratio(rho, mu, p1, p2, b1, b2):
    shift = [0.5, -1.0, 0.0, 2.0] if b2 == "all" else [0.5, -1.0]
    m = product(bracket(1, p1, block=b1), bracket(1, p2, block=b2, shift=shift))
    c = m.certificate
    lhs = m(rho)
    rhs = c.C0 * (1 + np.sum((rho - mu) ** 2)) ** (c.N0 / 2) * m(mu)
    assert lhs <= rhs * (1 + 1e-12)


def test_bracket_minus_three_certificate():
    m = bracket(1, -3)
    assert m.certificate.N0 == 3
    assert certify_order_axiom(m, samples=4000).passed


@given(exps, blocks)
def test_json_round_trip(p, block):
    m = product(bracket(1, p, block=block), constant(1, 2.5))
    back = OrderFunction.from_json(json.loads(m.dumps()))
    rho = np.linspace(-2, 3, 4)
    assert back(rho) == m(rho)
    assert back.dumps() == m.dumps()


def test_negative_constant_rejected():
    with pytest.raises(OrderFunctionError):
        OrderFunction.from_json({"n": 1, "domain": "ExE*", "expr": {"constant": -1}})


def test_wrong_dimension_rejected():
    with pytest.raises(OrderFunctionError):
        bracket(1, -2)(np.zeros(3))


@pytest.mark.parametrize("spec,expected,log", [
    ((4, 4, 0, 0), -4.0, False),
    ((2, 2, 0, 0), -2.0, True),
    # strengthened condition fails on the -N2 + M1 side; general formula still gives -2
    ((5, 3, 1, 0), -2.0, True),
])
def test_separable_exponent_arithmetic(spec, expected, log):
    N1, N2, M1, M2 = spec
    d = separable_compose(SeparableSpec(N1, M1), SeparableSpec(N2, M2))
    assert d.exponent == expected and d.log_factor == log


def test_separable_strengthened_flag():
    assert separable_compose(SeparableSpec(4, 0), SeparableSpec(4, 0)).strengthened
    assert not separable_compose(SeparableSpec(5, 1), SeparableSpec(3, 0)).strengthened


def test_divergent_composition():
    with pytest.raises(DivergenceError):
        separable_compose(SeparableSpec(1), SeparableSpec(1))
    m = bracket(1, -1, block="xstar")
    with pytest.raises(DivergenceError):
        compose(m, m, np.zeros(2), np.zeros(2), raise_on_divergence=True)


def test_as_separable_recognises_products():
    m = separable_order_function(SeparableSpec(4, 1))
    s = as_separable(m)
    assert s.N == 4 and s.M == 1
    assert as_separable(bracket(1, -3)) is None


def test_generic_path_matches_separable_values():
    """A permuted x* atom defeats the separable detector but is the same function."""
    m = bracket(1, -4, block="xstar")
    A = np.eye(4)[[3, 2]]
    from phasecalc.order_functions import BracketPower
    perm = OrderFunction(BracketPower(A, np.zeros(2), -4.0), 1)
    assert as_separable(perm) is None
    for r in (10.0, 40.0):
        zs = np.array([r, 0.5 * r])
        a = compose(m, m, np.zeros(2), zs).value
        b = compose(perm, perm, np.zeros(2), zs).value
        assert abs(a / b - 1) <= 1e-3


def test_kernel_form_jacobian():
    m1 = bracket(1, -4, block="xstar")
    m2 = product(bracket(1, -3, block="xstar"), bracket(1, 1, block="x"))
    S = SymplecticSpace(1)
    xt, yt = np.array([0.3, -0.2]), np.array([1.0, 0.5])
    mid, chord = chord_map(S, xt, yt)
    k = kernel_form_compose(m1, m2, xt, yt).value
    c = compose(m1, m2, mid, chord).value
    assert abs(k / (kernel_form_jacobian(1) * c) - 1) < 1e-8


def test_translate_constant_recorded():
    m1 = bracket(1, -4, block="xstar")
    T = np.random.default_rng(1).uniform(-2, 2, (5, 4))
    r = compose_is_order_function_check(m1, m1, np.zeros(2), np.zeros(2), T)
    assert r.passed and 0 < r.measured_constant <= r.constant_bound


def test_exponent_fit_matches_prediction():
    s = SeparableSpec(4, 0)
    f = fit_covector_exponent(separable_order_function(s), separable_order_function(s))
    assert abs(f.slope + 4) <= 0.1


def test_fiber_integral_is_two_pi():
    # frozen from scripts/oracles.py: radial closed form
    r = l1_fiber_certificate(bracket(1, -3, block="xstar"))
    assert abs(r.value - 6.283185307179586) <= 1e-4 * 6.283185307179586


def test_fiber_certificate_rejects_x_dependence():
    with pytest.raises(OrderFunctionError):
        l1_fiber_certificate(bracket(1, -3))


def test_constant_fiber_integral_diverges():
    assert not l1_fiber_certificate(constant(1)).finite
