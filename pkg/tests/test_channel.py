import numpy as np
import pytest
from hypothesis import given, strategies as st

from noisegeo.channel import (analytic_twirled_diagonal, average_gate_fidelity, exact_ptm, ptm_diagnostics,
                              ptm_of_unitary, twirled_ptm)
from noisegeo.geometry import MagnusOrders, error_unitary
from noisegeo.pauli import pauli_labels, pauli_matrix
from noisegeo.schedule import SQ_CLIFFORDS

small = st.floats(-0.2, 0.2)


def random_unitary(n, seed):
    r = np.random.default_rng(seed)
    q, rr = np.linalg.qr(r.normal(size=(2**n, 2**n)) + 1j * r.normal(size=(2**n, 2**n)))
    return q * (np.diag(rr) / abs(np.diag(rr)))


def test_hadamard_ptm_swaps_x_and_z():
    p = ptm_of_unitary(SQ_CLIFFORDS["H"])
    np.testing.assert_allclose(p, [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0], [0, 1, 0, 0]], atol=1e-15)


@given(st.integers(1, 2), st.integers(0, 10**6))
def test_unitary_ptm_is_orthogonal_and_unital(n, seed):
    p = ptm_of_unitary(random_unitary(n, seed))
    np.testing.assert_allclose(p @ p.T, np.eye(4**n), atol=1e-12)
    np.testing.assert_allclose(p[0], np.eye(4**n)[0], atol=1e-12)
    np.testing.assert_allclose(p[:, 0], np.eye(4**n)[0], atol=1e-12)


@given(st.integers(0, 10**6))
def test_twirl_projects_onto_diagonal(seed):
    u = random_unitary(2, seed)
    bare, tw = exact_ptm(u), twirled_ptm(u)
    np.testing.assert_allclose(tw, np.diag(np.diag(bare)), atol=1e-12)


def test_average_gate_fidelity_preserved_by_twirl():
    u = random_unitary(2, 3)
    assert abs(average_gate_fidelity(exact_ptm(u)) - average_gate_fidelity(twirled_ptm(u))) < 1e-12


def test_depolarizing_average_fidelity():
    p = 0.1
    ptm = np.diag([1] + [1 - p] * 3)
    # F = 1 - p/2 for a depolarizing channel with Bloch shrink 1-p on one qubit
    assert abs(average_gate_fidelity(ptm) - (1 - p / 2)) < 1e-15
    assert average_gate_fidelity(np.eye(16)) == pytest.approx(1.0)


def test_ensemble_average_of_paulis_is_depolarizing():
    ptm = exact_ptm([pauli_matrix(l) for l in pauli_labels(1)])
    np.testing.assert_allclose(ptm, np.diag([1, 0, 0, 0]), atol=1e-15)


@given(small, small, small)
def test_analytic_diagonal_through_fourth_order_on_commuting_axes(a, b, c):
    o = MagnusOrders.single_axis(2, {"XI": a, "IX": b, "XX": c})
    exact = np.diag(twirled_ptm(error_unitary(o)))
    approx = analytic_twirled_diagonal(o, 4).coefficients
    scale = max(abs(a), abs(b), abs(c))
    assert np.max(np.abs(exact - approx)) <= 20 * scale**6 + 1e-14


def test_anticommuting_pair_is_outside_the_pair_term():
    # exp(-i(bY + cZ)) rotates by 2r, r^2 = b^2 + c^2: the exact X entry carries
    # (4/3) b^2 c^2 at fourth order, which the commuting-pair term omits
    b = c = 0.01
    o = MagnusOrders.single_axis(1, {"Y": b, "Z": c})
    exact = np.diag(twirled_ptm(error_unitary(o)))[1]
    approx = analytic_twirled_diagonal(o, 4).coefficient("X")
    assert abs(exact - np.cos(2 * np.hypot(b, c))) < 1e-15
    assert abs((exact - approx) - 4 / 3 * b**2 * c**2) < 1e-12


def test_single_axis_is_cosine():
    th = 0.01
    o = MagnusOrders.single_axis(1, {"X": th})
    d = analytic_twirled_diagonal(o, 4)
    assert abs(d.coefficient("Z") - np.cos(2 * th)) < 1e-12
    assert d.coefficient("X") == 1.0


def test_mpmath_ptm_agrees_with_double():
    import mpmath

    o = MagnusOrders.single_axis(2, {"XI": 0.1, "ZZ": 0.05})
    ref = twirled_ptm(error_unitary(o))
    with mpmath.workdps(30):
        hp = twirled_ptm(error_unitary(o, dps=30), dps=30)
        hp = np.array([[float(x) for x in row] for row in hp])
    np.testing.assert_allclose(hp, ref, atol=1e-14)


def test_diagnostics():
    d = ptm_diagnostics(np.eye(16))
    assert d["max_offdiagonal"] == 0 and d["average_gate_fidelity"] == pytest.approx(1)
    with pytest.raises(ValueError):
        analytic_twirled_diagonal(MagnusOrders.single_axis(1, {"X": 0.1}), 5)
