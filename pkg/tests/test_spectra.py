import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from noisegeo.geometry import error_curves, first_order_error
from noisegeo.pauli import pauli_matrix
from noisegeo.schedule import ControlTerm, HamiltonianSchedule, NoiseTerm, PulseShape
from noisegeo.spectra import (OrnsteinUhlenbeck, QuasiStatic, Tabulated, White, process_from_dict, second_moment,
                              synthesize, synthesize_realization)


def schedule(process, area=np.pi, n=256):
    p = PulseShape.cosine(1.0, area, n)
    return HamiltonianSchedule(1, (ControlTerm(p, 0.5 * pauli_matrix("X")),), (NoiseTerm({"Z": 1.0}, process),))


@given(st.floats(0.01, 2.0), st.floats(0.05, 5.0))
def test_ou_psd_integrates_to_variance(sigma, tau):
    p = OrnsteinUhlenbeck(sigma=sigma, tau_c=tau)
    total = 2 * quad(lambda w: p.psd(np.array([w]))[0], 0, np.inf, limit=200)[0]
    assert abs(total - sigma**2) < 1e-6 * sigma**2


def test_ou_sampler_autocorrelation():
    p = OrnsteinUhlenbeck(sigma=1.0, tau_c=0.1)
    dt, lag = 0.01, 10
    x = np.array([p.sample(400, dt, np.random.default_rng(k)) for k in range(2000)])
    assert abs(np.var(x[:, 0]) - 1) < 0.1
    c = np.mean(x[:, 100] * x[:, 100 + lag])
    assert abs(c - np.exp(-lag * dt / 0.1)) < 0.06


def test_white_sampler_variance():
    x = White(level=0.5).sample(200_000, 0.01, np.random.default_rng(0))
    assert abs(np.var(x) / (2 * np.pi * 0.5 / 0.01) - 1) < 0.02


def test_quasi_static_constant_in_time():
    x = QuasiStatic(std=0.3).sample(50, 0.1, np.random.default_rng(1))
    assert np.all(x == x[0])


def test_process_from_dict():
    assert process_from_dict({"kind": "white", "level": 2.0}) == White(level=2.0)
    with pytest.raises(ValueError):
        process_from_dict({"kind": "pink"})
    with pytest.raises(ValueError):
        OrnsteinUhlenbeck(sigma=-1, tau_c=1)


def test_tabulated_requires_symmetric_table():
    with pytest.raises(ValueError):
        Tabulated(omega=np.array([0.0, 1.0]), values=np.array([1.0, 1.0]))


def test_seeded_synthesis_is_reproducible():
    s = schedule(OrnsteinUhlenbeck(sigma=1.0, tau_c=0.2))
    a, b = synthesize(s, 42), synthesize(s, 42)
    np.testing.assert_array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, synthesize(s, 43).samples)


def test_quasi_static_moment_equals_direct_variance():
    s = schedule(QuasiStatic(std=0.02))
    c = error_curves(s)[0]
    rep = second_moment([c])
    np.testing.assert_allclose(rep.fluctuation, 0.02**2 * first_order_error(c, 1.0) ** 2, rtol=1e-12, atol=1e-30)


def test_mean_term_from_process_mean():
    s = schedule(QuasiStatic(std=0.0, mean=0.05))
    c = error_curves(s)[0]
    rep = second_moment([c])
    np.testing.assert_allclose(rep.mean_components, first_order_error(c, 0.05), atol=1e-16)
    np.testing.assert_allclose(rep.total, first_order_error(c, 0.05) ** 2, atol=1e-18)


def test_quasi_static_mean_term_matches_monte_carlo():
    s = schedule(QuasiStatic(std=0.01, mean=0.02))
    c = error_curves(s)[0]
    rep = second_moment([c])
    r = np.array([first_order_error(c, synthesize_realization(c.process, c.times, k)) for k in range(20_000)])
    m2 = np.mean(r**2, axis=0)
    se = np.std(r**2, axis=0) / np.sqrt(len(r))
    big = rep.total > 1e-12
    assert np.all(np.abs(m2 - rep.total)[big] <= 3 * se[big])


def test_fully_correlated_sources_add_coherently():
    p = PulseShape.cosine(1.0, np.pi, 128)
    proc = OrnsteinUhlenbeck(sigma=0.01, tau_c=0.3)
    s = HamiltonianSchedule(1, (ControlTerm(p, 0.5 * pauli_matrix("X")),),
                            (NoiseTerm({"Z": 1.0}, proc), NoiseTerm({"Z": 1.0}, proc)))
    c = error_curves(s)
    single = second_moment(c[:1]).total
    both = second_moment(c, cross_spectra={(0, 1): proc}, correlated=[(0, 1)]).total
    np.testing.assert_allclose(both, 4 * single, rtol=1e-12, atol=1e-30)
    with pytest.raises(ValueError):
        second_moment(c, correlated=[(0, 1)])


@given(st.floats(0.5, 12.0), st.floats(0.01, 1.0))
def test_fluctuation_moments_are_real_and_nonnegative(area, tau):
    c = error_curves(schedule(OrnsteinUhlenbeck(sigma=0.1, tau_c=tau), area, 64))[0]
    rep = second_moment([c], omega=np.linspace(-200, 200, 513))
    assert rep.fluctuation.dtype.kind == "f"
    assert np.all(rep.fluctuation >= -1e-18)
