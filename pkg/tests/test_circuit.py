import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from noisegeo.circuit import Circuit, EasyLayer, HardLayer, propagate_error_front, simulate_exact, total_error_phase
from noisegeo.pauli import error_axes, error_vector_operator, pauli_matrix
from noisegeo.schedule import (CNOT, SQ_CLIFFORDS, ControlTerm, HamiltonianSchedule, NoiseTerm, PulseShape,
                               equal_up_to_phase, make_gate)

CNOT_NOISE = (NoiseTerm({"IZ": 1.0, "ZI": -1.0, "ZZ": 0.5}),)


def z_idle_layer():
    """One-qubit hard layer: 2 pi X turn with static Z noise, local error on Y only."""
    p = PulseShape.constant(np.pi, 1.0, 256)
    s = HamiltonianSchedule(1, (ControlTerm(p, 0.5 * pauli_matrix("X")),), (NoiseTerm({"Z": 1.0}),))
    return HardLayer(s, scipy.linalg.expm(-0.5j * np.pi * pauli_matrix("X")), "xpi")


def test_hard_layer_checks_target():
    g = make_gate("xx_halfpi")
    with pytest.raises(ValueError):
        HardLayer(g.schedule, np.eye(4))


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        Circuit(2, [EasyLayer(np.eye(2))])


def test_front_propagation_through_clifford():
    # error on Y after an X half turn; an S gate before it maps S^dag Y S = X
    layer = z_idle_layer()
    r_lo = layer.local_error(0.01)
    iy, ix = error_axes(1).index("Y"), error_axes(1).index("X")
    assert abs(r_lo[iy]) > 1e-3 and np.sum(np.abs(np.delete(r_lo, iy))) < 1e-15
    c = Circuit(1, [EasyLayer(SQ_CLIFFORDS["S"], "S"), layer])
    step = propagate_error_front(c, 0.01).steps[0]
    assert abs(step[ix] - r_lo[iy]) < 1e-15


def test_hadamard_maps_z_step_to_x():
    # build a local error on Z directly and propagate it through a preceding H
    c = Circuit(1, [EasyLayer(SQ_CLIFFORDS["H"], "H"), z_idle_layer()])
    r = np.zeros(3)
    r[error_axes(1).index("Z")] = 0.2
    step = propagate_error_front(c, None, local_steps=[r]).steps[0]
    np.testing.assert_allclose(step, [0.2, 0, 0], atol=1e-15)


def test_first_layer_is_not_conjugated():
    c = Circuit.from_gates([make_gate("xx_halfpi", noise=CNOT_NOISE)])
    tr = propagate_error_front(c, 0.01)
    np.testing.assert_allclose(tr.steps[0], tr.local_steps[0])


@given(st.floats(1e-4, 1e-3))
def test_front_propagated_total_predicts_exact_unitary(eps):
    c = Circuit.from_gates(make_gate("cnot_composite", noise=CNOT_NOISE) * 3)
    total, dist = total_error_phase(propagate_error_front(c, eps, second_order=False))
    approx = c.ideal_unitary() @ scipy.linalg.expm(-1j * error_vector_operator(total, 2))
    # first-order composition: the residual is second order in eps
    assert equal_up_to_phase(simulate_exact(c, eps), approx) < 5 * eps**2
    assert dist > 0


def test_commuting_chain_walks_in_a_straight_line():
    layer = Circuit.from_gates([make_gate("iswap", noise=(NoiseTerm({"XX": 1.0, "YY": 1.0}),))])
    tr = propagate_error_front(layer.repeat(10), 0.01)
    np.testing.assert_allclose(tr.distances, np.arange(1, 11) * np.linalg.norm(tr.local_steps[0]), rtol=1e-12)


def test_simulate_exact_with_state_and_zero_noise():
    c = Circuit.from_gates(make_gate("cnot_composite", noise=CNOT_NOISE))
    u, psi = simulate_exact(c, 0.0, np.array([0, 0, 1, 0], dtype=complex))
    assert equal_up_to_phase(u, CNOT) < 1e-8
    assert abs(abs(psi[3]) - 1) < 1e-8
    with pytest.raises(ValueError):
        simulate_exact(c, 0.0, np.array([1, 1, 0, 0], dtype=complex))


def test_per_layer_realizations_length_checked():
    c = Circuit.from_gates([make_gate("xx_halfpi", noise=CNOT_NOISE)]).repeat(2)
    with pytest.raises(ValueError):
        propagate_error_front(c, [0.1])
    tr = propagate_error_front(c, [0.1, 0.0])
    assert np.any(tr.local_steps[0]) and not np.any(tr.local_steps[1])


def test_merged_multiplies_easy_layers():
    h, s = SQ_CLIFFORDS["H"], SQ_CLIFFORDS["S"]
    c = Circuit(1, [EasyLayer(h), EasyLayer(s)]).merged()
    assert len(c) == 1
    np.testing.assert_allclose(c.layers[0].unitary, s @ h)
