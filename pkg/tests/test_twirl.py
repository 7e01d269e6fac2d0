import numpy as np
import pytest
from hypothesis import given, strategies as st

from noisegeo.circuit import Circuit, propagate_error_front
from noisegeo.pauli import commutes, error_axes, pauli_matrix
from noisegeo.schedule import NoiseTerm, equal_up_to_phase, make_gate
from noisegeo.twirl import (TwirlAssignment, apply_twirls, dressed_error, enumerate_twirl_average, layer_rng,
                            sample_twirls)

NOISE = (NoiseTerm({"IZ": 1.0, "ZI": -1.0, "ZZ": 0.5}),)


def cnot_chain(n):
    return Circuit.from_gates(make_gate("cnot_composite", noise=NOISE)).repeat(n)


@given(st.integers(0, 2**32 - 1), st.integers(0, 50))
def test_twirled_circuit_is_ideally_transparent(seed, run):
    c = cnot_chain(3)
    t = apply_twirls(c, sample_twirls(c, seed, run_index=run))
    assert equal_up_to_phase(t.ideal_unitary(), c.ideal_unitary()) < 1e-12


def test_sampling_depends_only_on_seed_run_layer():
    c = cnot_chain(4)
    a = sample_twirls(c, 9, run_index=3)
    assert a == sample_twirls(c, 9, run_index=3)
    # the first layers' picks do not change when the circuit grows
    assert sample_twirls(cnot_chain(6), 9, run_index=3).paulis[:4] == a.paulis
    assert layer_rng(1, 2, 3).integers(1 << 30) == layer_rng(1, 2, 3).integers(1 << 30)


def test_assignment_json_roundtrip():
    a = TwirlAssignment(("XI", "ZY"), 5, 2)
    assert TwirlAssignment.from_json(a.to_json()) == a
    assert '"0": "XI"' in a.to_json()


def test_wrong_assignment_length():
    with pytest.raises(ValueError):
        apply_twirls(cnot_chain(2), TwirlAssignment(("XI",)))


@given(st.sampled_from(["IX", "XY", "ZZ", "YI"]))
def test_dressed_error_sign_flips(p):
    r = np.arange(1.0, 16.0)
    d = dressed_error(r, p)
    for j, ax in enumerate(error_axes(2)):
        assert d[j] == (r[j] if commutes(p, ax) else -r[j])


def test_twirl_flips_front_step_signs():
    # a twirl T before a hard layer turns its local step into T^dag R T
    c = Circuit.from_gates([make_gate("xx_halfpi", noise=NOISE)])
    tr0 = propagate_error_front(c, 0.01)
    for p in ("XI", "IY", "ZZ"):
        t = apply_twirls(c, TwirlAssignment((p,)))
        tr = propagate_error_front(t, 0.01)
        np.testing.assert_allclose(tr.steps[0], dressed_error(tr0.steps[0], p), atol=1e-15)


def test_enumeration_counts_and_cap():
    allw = enumerate_twirl_average(cnot_chain(2))
    assert len(allw) == 256
    assert abs(sum(w for _, w in allw) - 1) < 1e-12
    with pytest.raises(ValueError):
        enumerate_twirl_average(cnot_chain(4))
    assert len(enumerate_twirl_average(3, ["II", "XX"], n_qubits=2)) == 8


def test_reduced_twirl_set_validation():
    with pytest.raises(ValueError):
        sample_twirls(cnot_chain(1), 0, ["X"])
