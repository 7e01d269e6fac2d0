import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from noisegeo.geometry import (MagnusOrders, error_curves, error_unitary, first_order_error, magnus_orders,
                               toggling_frame_curve)
from noisegeo.pauli import error_axes, expand_in_pauli_basis, pauli_matrix
from noisegeo.schedule import ControlTerm, HamiltonianSchedule, NoiseTerm, PulseShape, propagate_noisy

X, Y, Z = (pauli_matrix(c) for c in "XYZ")


def drive(pulse, terms=({"Z": 1.0},)):
    return HamiltonianSchedule(1, (ControlTerm(pulse, 0.5 * X),), tuple(NoiseTerm(t) for t in terms))


def test_curve_matches_direct_conjugation():
    omega, T = 3.0, 1.0
    s = drive(PulseShape.constant(omega, T, 256))
    c = toggling_frame_curve(s, 0)
    for k in (0, 57, 200, 256):
        u0 = scipy.linalg.expm(-0.5j * omega * c.times[k] * X)
        ref = expand_in_pauli_basis(u0.conj().T @ Z @ u0)[1:].real
        np.testing.assert_allclose(c.rprime[k], ref, atol=1e-12)
    iy, iz = error_axes(1).index("Y"), error_axes(1).index("Z")
    np.testing.assert_allclose(c.rprime[:, iz], np.cos(omega * c.times), atol=1e-12)
    np.testing.assert_allclose(np.abs(c.rprime[:, iy]), np.abs(np.sin(omega * c.times)), atol=1e-12)


@given(st.floats(0.5, 20.0))
def test_single_pauli_noise_has_unit_speed(area):
    c = toggling_frame_curve(drive(PulseShape.cosine(1.0, area, 64)), 0)
    np.testing.assert_allclose(c.speed(), 1.0, atol=1e-12)


def test_two_pi_constant_drive_closes_the_curve():
    s = drive(PulseShape.constant(2 * np.pi, 1.0, 512))
    assert np.linalg.norm(first_order_error(error_curves(s)[0], 0.01)) < 1e-14


def test_half_turn_error_on_y_axis():
    omega = np.pi
    s = drive(PulseShape.constant(omega, 1.0, 512))
    r = first_order_error(error_curves(s)[0], 0.01)
    assert abs(abs(r[error_axes(1).index("Y")]) - 2 * 0.01 / omega) < 1e-14
    assert abs(r[error_axes(1).index("Z")]) < 1e-14


@given(st.floats(-0.1, 0.1), st.floats(-0.1, 0.1))
def test_first_order_error_is_linear(a, b):
    c = error_curves(drive(PulseShape.cosine(1.0, np.pi, 64)))[0]
    r = first_order_error(c, a + b)
    np.testing.assert_allclose(r, first_order_error(c, a) + first_order_error(c, b), atol=1e-15)


def test_second_order_matches_matrix_logarithm():
    # log(U0^dag U) = -i (R1 + R2 + O(eps^3)) . sigma
    s = drive(PulseShape.cosine(1.0, np.pi, 512), ({"Z": 1.0}, {"Y": 0.5}))
    eps = 1e-3
    orders = magnus_orders(s, [eps, eps])
    u0 = propagate_noisy(s, [0.0, 0.0])
    gen = 1j * scipy.linalg.logm(u0.conj().T @ propagate_noisy(s, [eps, eps]))
    ref = expand_in_pauli_basis(gen)[1:].real
    assert np.linalg.norm(orders.R1 + orders.R2 - ref) < 10 * eps**3
    assert np.linalg.norm(orders.R2) > 100 * eps**3


def test_orders_parity_in_noise_strength():
    s = drive(PulseShape.cosine(1.0, np.pi, 128))
    p, m = magnus_orders(s, 0.02), magnus_orders(s, -0.02)
    np.testing.assert_allclose(p.R1, -m.R1, atol=1e-15)
    np.testing.assert_allclose(p.R2, m.R2, atol=1e-15)


def test_error_unitary_precision_paths_agree():
    import mpmath

    o = MagnusOrders.single_axis(1, {"X": 0.3, "Z": -0.1})
    u = error_unitary(o)
    with mpmath.workdps(30):
        um = error_unitary(o, dps=30)
        diff = max(abs(complex(um[i, j]) - u[i, j]) for i in range(2) for j in range(2))
    assert diff < 1e-14


def test_orders_validation():
    with pytest.raises(ValueError):
        MagnusOrders(1, np.zeros(2), np.zeros(3))
