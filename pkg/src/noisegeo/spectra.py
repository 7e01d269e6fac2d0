"""Noise processes, their power spectral densities, and first-order filter functions.

PSD convention: ``S(w) = 1/(2 pi) int ds exp(-i w s) <eps(s) eps(0)>``, so
white noise of level ``S0`` has ``<eps(s) eps(0)> = 2 pi S0 delta(s)`` and the
second moment of a first-order error component is ``int S(w) |F(w)|^2 dw``
with ``F(w) = int C(s) r'(s) exp(i w s) ds``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.special import sici


@dataclass(frozen=True)
class NoiseProcess:
    """Base class; ``mean`` is the deterministic offset of the strength."""

    mean: float = 0.0

    kind = "none"

    def psd(self, omega: np.ndarray) -> np.ndarray:
        return np.zeros_like(np.asarray(omega, dtype=float))

    def delta_weight(self) -> float:
        """Weight of a ``delta(w)`` component in the PSD."""
        return 0.0

    def tail_level(self) -> float:
        """Constant PSD level assumed beyond the quadrature cutoff."""
        return 0.0

    def sample(self, n_points: int, dt: float, rng: np.random.Generator) -> np.ndarray:
        return np.zeros(n_points)


def _nonneg(**kw):
    for k, v in kw.items():
        if not np.all(np.asarray(v) >= 0):
            raise ValueError(f"{k} must be non-negative, got {v}")


@dataclass(frozen=True)
class QuasiStatic(NoiseProcess):
    """Constant within a run, Gaussian across runs: ``S = std^2 delta(w)``."""

    std: float = 0.0
    kind = "quasi-static"

    def __post_init__(self):
        _nonneg(std=self.std)

    def delta_weight(self):
        return self.std**2

    def sample(self, n_points, dt, rng):
        return np.full(n_points, self.std * rng.standard_normal())


@dataclass(frozen=True)
class OrnsteinUhlenbeck(NoiseProcess):
    """Stationary OU noise, ``<eps eps> = sigma^2 exp(-|s|/tau_c)``."""

    sigma: float = 0.0
    tau_c: float = 1.0
    kind = "ornstein-uhlenbeck"

    def __post_init__(self):
        _nonneg(sigma=self.sigma)
        if self.tau_c <= 0:
            raise ValueError("tau_c must be positive")

    def psd(self, omega):
        omega = np.asarray(omega, dtype=float)
        return self.sigma**2 * self.tau_c / (np.pi * (1 + (omega * self.tau_c) ** 2))

    def sample(self, n_points, dt, rng):
        # exact AR(1) update of the stationary process
        a = np.exp(-dt / self.tau_c)
        kick = self.sigma * np.sqrt(1 - a * a)
        z = rng.standard_normal(n_points)
        x = np.empty(n_points)
        x[0] = self.sigma * z[0]
        for k in range(1, n_points):
            x[k] = a * x[k - 1] + kick * z[k]
        return x


@dataclass(frozen=True)
class White(NoiseProcess):
    level: float = 0.0
    kind = "white"

    def __post_init__(self):
        _nonneg(level=self.level)

    def psd(self, omega):
        return np.full_like(np.asarray(omega, dtype=float), self.level)

    def tail_level(self):
        return self.level

    def sample(self, n_points, dt, rng):
        return np.sqrt(2 * np.pi * self.level / dt) * rng.standard_normal(n_points)


@dataclass(frozen=True)
class Tabulated(NoiseProcess):
    """PSD samples on a grid symmetric about zero; zero outside the table."""

    omega: tuple = ()
    values: tuple = ()
    kind = "tabulated"

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        s = np.asarray(self.values, dtype=float)
        if w.ndim != 1 or w.shape != s.shape or len(w) < 3:
            raise ValueError("tabulated PSD needs matching 1-d omega/value arrays")
        if np.any(np.diff(w) <= 0):
            raise ValueError("tabulated omega grid must be increasing")
        if not np.allclose(w, -w[::-1]) or not np.allclose(s, s[::-1]):
            raise ValueError("tabulated PSD of a real process must be symmetric about 0")
        _nonneg(values=s)
        object.__setattr__(self, "omega", tuple(w))
        object.__setattr__(self, "values", tuple(s))

    def psd(self, omega):
        return np.interp(omega, self.omega, self.values, left=0.0, right=0.0)

    def sample(self, n_points, dt, rng):
        # random-phase synthesis on the non-negative half of the table
        w = np.asarray(self.omega)
        s = np.asarray(self.values)
        keep = w >= 0
        w, s = w[keep], s[keep]
        dw = np.gradient(w)
        amp = np.sqrt(2 * s * dw)
        amp[w == 0] = np.sqrt(s[w == 0] * dw[w == 0])
        t = dt * np.arange(n_points)
        a, b = rng.standard_normal((2, len(w)))
        phase = np.outer(t, w)
        return np.cos(phase) @ (amp * a) + np.sin(phase) @ (amp * b)


PROCESS_KINDS = {
    "quasi-static": QuasiStatic,
    "ornstein-uhlenbeck": OrnsteinUhlenbeck,
    "white": White,
    "tabulated": Tabulated,
}


def process_from_dict(d: Mapping) -> NoiseProcess:
    d = dict(d)
    kind = d.pop("kind")
    try:
        cls = PROCESS_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown noise process kind {kind!r}") from None
    return cls(**d)


@dataclass(frozen=True)
class NoiseRealization:
    """Strength samples ``eps_i(t_k)`` for every noise term of a schedule."""

    samples: np.ndarray
    times: np.ndarray
    seed: object = None
    mean: np.ndarray = field(default=None)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def synthesize_realization(process: NoiseProcess, times: np.ndarray, seed=None,
                           mean_profile: np.ndarray | float | None = None) -> np.ndarray:
    """One sample path of ``process`` on ``times`` (uniform grid), mean added."""
    times = np.asarray(times, dtype=float)
    dt = times[1] - times[0]
    mean = process.mean if mean_profile is None else mean_profile
    return np.asarray(mean, dtype=float) + process.sample(len(times), dt, _rng(seed))


def synthesize(schedule, seed=None, processes: Sequence[NoiseProcess] | None = None) -> NoiseRealization:
    """Draw one realization for every noise term of ``schedule``."""
    processes = [nt.process for nt in schedule.noise] if processes is None else list(processes)
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = ss.spawn(len(processes))
    rows = [synthesize_realization(p, schedule.times, np.random.default_rng(c)) for p, c in zip(processes, children)]
    means = np.array([np.full(len(schedule.times), p.mean) for p in processes])
    return NoiseRealization(np.array(rows).reshape(len(processes), len(schedule.times)),
                            schedule.times, seed=getattr(ss, "entropy", seed), mean=means)


# ---------------------------------------------------------------------------
# filter functions and moments

def default_omega_grid(duration: float, n_points: int = 2**12, cutoff_periods: int = 64) -> np.ndarray:
    w_max = cutoff_periods * 2 * np.pi / duration
    return np.linspace(-w_max, w_max, n_points + 1)


def _weighted_integrand(curve) -> np.ndarray:
    """``C_k w_q r'(t_kq)`` flattened over (step, node), shape ``(N*q, A)``."""
    g = curve.rprime_nodes * (curve.node_weights * curve.step_profile[:, None])[..., None]
    return g.reshape(-1, g.shape[-1])


def filter_function(curve, omega, chunk: int = 256) -> np.ndarray:
    """``F_j(w) = int C(s) r'_j(s) exp(i w s) ds``, shape ``(len(omega), A)``."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    g = _weighted_integrand(curve)
    t = curve.node_times.reshape(-1)
    out = np.empty((len(omega), g.shape[1]), dtype=complex)
    for s in range(0, len(omega), chunk):
        out[s:s + chunk] = np.exp(1j * np.outer(omega[s:s + chunk], t)) @ g
    return out


def _flat_tail(curve, w_max: float) -> np.ndarray:
    """``int_{|w|>W} |F_j(w)|^2 dw`` from the endpoint jumps of ``C r'``."""
    g0 = curve.step_profile[0] * curve.rprime[0]
    g1 = curve.step_profile[-1] * curve.rprime[-1]
    T = curve.duration
    si, _ = sici(T * w_max)
    ci_int = np.cos(T * w_max) / w_max - T * (np.pi / 2 - si)
    return 2 * ((g0**2 + g1**2) / w_max - 2 * g0 * g1 * ci_int)


@dataclass
class MomentReport:
    """Per-axis pieces of ``<(R_j^{[1]})^2>``."""

    axes: tuple
    mean_components: np.ndarray  # <R_j>, summed over sources
    mean_term: np.ndarray        # sum_ik <R_j^(i)> <R_j^(k)>
    fluctuation: np.ndarray      # sum_ik int S_ik F*_ij F_kj dw
    truncation: np.ndarray       # change in the fluctuation term when the cutoff is halved

    @property
    def total(self) -> np.ndarray:
        return self.mean_term + self.fluctuation


def mean_error(curve, mean_profile) -> np.ndarray:
    """``<R_j> = int eps_bar(s) C(s) r'_j(s) ds`` with the curve's quadrature."""
    mp = np.broadcast_to(np.asarray(mean_profile, dtype=float), curve.times.shape)
    mids = 0.5 * (mp[1:] + mp[:-1])
    g = curve.rprime_nodes * (curve.node_weights * (curve.step_profile * mids)[:, None])[..., None]
    return g.sum(axis=(0, 1))


def _spectral_integral(s_ik, f_i, f_k, omega):
    integrand = (s_ik[:, None] * np.conj(f_i) * f_k).real
    return np.trapezoid(integrand, omega, axis=0)


def second_moment(curves: Sequence, spectra: Sequence[NoiseProcess] | None = None,
                  mean_profiles: Sequence | None = None, omega: np.ndarray | None = None,
                  cross_spectra: Mapping | None = None, correlated: Sequence = ()) -> MomentReport:
    """Second moment of every first-order error component.

    ``spectra`` default to each curve's noise process; ``mean_profiles``
    default to the processes' constant means.  Cross-spectra are zero unless
    given in ``cross_spectra`` as ``{(i, k): process}``; a pair listed in
    ``correlated`` without a cross-spectrum is an error.
    """
    curves = list(curves)
    if spectra is None:
        spectra = [c.process for c in curves]
    if mean_profiles is None:
        mean_profiles = [s.mean for s in spectra]
    cross_spectra = dict(cross_spectra or {})
    for pair in correlated:
        i, k = pair
        if (i, k) not in cross_spectra and (k, i) not in cross_spectra:
            raise ValueError(f"sources {i} and {k} are marked correlated but have no cross-spectrum")
    if omega is None:
        omega = default_omega_grid(curves[0].duration)
    omega = np.asarray(omega, dtype=float)
    w_max = float(np.max(np.abs(omega)))
    inner = np.abs(omega) <= 0.5 * w_max + 1e-12 * w_max

    means = [mean_error(c, m) for c, m in zip(curves, mean_profiles)]
    mean_total = np.sum(means, axis=0)
    # sum_ik <R^(i)><R^(k)> = (sum_i <R^(i)>)^2
    mean_term = mean_total**2

    ffs = [filter_function(c, omega) for c in curves]
    fluct = np.zeros_like(mean_total)
    fluct_half = np.zeros_like(mean_total)
    pairs = {(i, i): s for i, s in enumerate(spectra)}
    for (i, k), s in cross_spectra.items():
        pairs[i, k] = s
        if (k, i) not in cross_spectra and i != k:
            pairs[k, i] = s
    for (i, k), s in pairs.items():
        f_i, f_k = ffs[i], ffs[k]
        if s.delta_weight():
            f0_i = filter_function(curves[i], [0.0])[0]
            f0_k = filter_function(curves[k], [0.0])[0]
            contrib = s.delta_weight() * (np.conj(f0_i) * f0_k).real
            fluct += contrib
            fluct_half += contrib
        s_w = s.psd(omega)
        if np.any(s_w):
            full = _spectral_integral(s_w, f_i, f_k, omega)
            coarse = _spectral_integral(s_w[inner], f_i[inner], f_k[inner], omega[inner])
            if i == k and s.tail_level():
                full = full + s.tail_level() * _flat_tail(curves[i], w_max)
                coarse = coarse + s.tail_level() * _flat_tail(curves[i], 0.5 * w_max)
            fluct += full
            fluct_half += coarse
    return MomentReport(tuple(curves[0].axes), mean_total, mean_term, fluct, np.abs(fluct - fluct_half))


def white_noise_time_integral(curve, level: float) -> np.ndarray:
    """Per-axis ``2 pi S0 int (C r'_j)^2 dt`` (time-domain side of Parseval)."""
    w = curve.node_weights * curve.step_profile[:, None] ** 2
    return 2 * np.pi * level * np.einsum("kq,kqa->a", w, curve.rprime_nodes**2)
