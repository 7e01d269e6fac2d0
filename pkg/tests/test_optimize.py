import numpy as np
import pytest

from noisegeo.optimize import TARGETS, _SingleControlCost, first_order_cost, optimize_first_order_pulse, template_pulse
from noisegeo.pauli import pauli_sum


@pytest.mark.parametrize("target,axes", [("xx_halfpi", ("IZ", "ZI", "ZZ")), ("x_pi", ("Z", "Y")),
                                         ("iswap", ("ZI",))])
def test_closed_form_cost_matches_frame_route(target, axes):
    n, ctrl, area = TARGETS[target]
    p = template_pulse([area + 0.3, 0.3, -0.6], 1.0, 128)
    a = pauli_sum(ctrl)
    assert _SingleControlCost(a, axes)(p) == pytest.approx(first_order_cost(p, a, n, axes), rel=1e-10)


def test_x_pi_robust_to_dephasing():
    r = optimize_first_order_pulse("x_pi", ("Z",), n_coefficients=4, n_steps=256, n_starts=3)
    assert r.success and r.gate_error < 1e-8
    n, ctrl, _ = TARGETS["x_pi"]
    assert np.sqrt(first_order_cost(r.pulse, pauli_sum(ctrl), n, ("Z",))) < 1e-4
    assert r.cost <= r.baseline_cost / 100


def test_commuting_noise_is_reported_uncorrectable():
    r = optimize_first_order_pulse("iswap", ("XX",))
    assert not r.success and "commutes" in r.message


def test_seeded_result_is_reproducible():
    a = optimize_first_order_pulse("x_halfpi", ("Z",), n_coefficients=3, n_steps=128, n_starts=2, seed=4)
    b = optimize_first_order_pulse("x_halfpi", ("Z",), n_coefficients=3, n_steps=128, n_starts=2, seed=4)
    np.testing.assert_array_equal(a.pulse.amplitude, b.pulse.amplitude)


def test_argument_validation():
    with pytest.raises(ValueError):
        optimize_first_order_pulse("x_pi", ("Z",), n_coefficients=2)
    with pytest.raises(ValueError):
        optimize_first_order_pulse("cz", ("Z",))
