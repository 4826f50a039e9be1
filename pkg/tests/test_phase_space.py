import numpy as np
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from phasecalc.phase_space import (Lattice, SymplecticSpace, chord_map, chord_map_inverse,
                                   lattice_points, symplectic_form)

vec4 = arrays(float, 4, elements=st.floats(-50, 50))


def test_hamilton_map_squares_to_minus_identity():
    for n in (1, 2, 3):
        J = SymplecticSpace(n).J
        assert np.array_equal(J @ J, -np.eye(2 * n))


@given(vec4, vec4)
def test_symplectic_form_is_antisymmetric(u, v):
    S = SymplecticSpace(2)
    assert symplectic_form(S, u, v) == -symplectic_form(S, v, u)


@given(vec4, vec4)
def test_chord_map_round_trip(x, y):
    S = SymplecticSpace(2)
    mid, chord = chord_map(S, x, y)
    x2, y2 = chord_map_inverse(S, mid, chord)
    assert np.allclose(x2, x, atol=1e-9) and np.allclose(y2, y, atol=1e-9)


def test_chord_map_of_diagonal_has_zero_chord():
    S = SymplecticSpace(1)
    mid, chord = chord_map(S, np.array([1.0, 2.0]), np.array([1.0, 2.0]))
    assert np.allclose(mid, [1, 2]) and np.allclose(chord, 0)


def test_lattice_covolume_and_json():
    lat = Lattice.scaled(4, 1.5)
    assert np.isclose(lat.covolume, 1.5 ** 4)
    assert lat.is_diagonal
    back = Lattice.from_json(lat.to_json())
    assert np.array_equal(back.basis, lat.basis)


def test_lattice_points_in_box():
    pts = lattice_points(Lattice.scaled(2), np.array([-2.0, -2.0]), np.array([2.0, 2.0]))
    assert len(pts) == 25
