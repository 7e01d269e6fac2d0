"""First-order robust pulse search over a truncated cosine series.

The template is ``Omega(t) = sum_n c_n (1 - cos(2 pi n t / T))``; the pulse
area is pinned by solving for ``c_1``, so only ``c_2..c_N`` are free.  The
cost is the summed squared first-order error vector of unit quasi-static
noise on each listed axis, in units of ``T^2``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import minimize

from .geometry import ToggleFrame, toggling_frame_curve, first_order_error
from .pauli import commutes, pauli_matrix, pauli_sum
from .schedule import (DEFAULT_STEPS, ControlTerm, HamiltonianSchedule, NoiseTerm, PulseShape,
                       equal_up_to_phase, propagate_noiseless)

log = logging.getLogger(__name__)

# name -> (qubits, control operator labels, pulse area)
TARGETS = {
    "xx_halfpi": (2, {"XX": 0.5}, np.pi / 2),
    "x_halfpi": (1, {"X": 0.5}, np.pi / 2),
    "x_pi": (1, {"X": 0.5}, np.pi),
    "identity": (1, {"X": 0.5}, 2 * np.pi),
    "iswap": (2, {"XX": 1.0, "YY": 1.0}, np.pi / 4),
}


@dataclass
class PulseOptimization:
    pulse: PulseShape
    success: bool
    cost: float
    baseline_cost: float
    gate_error: float
    coefficients: np.ndarray
    message: str
    n_evaluations: int = 0
    history: list = field(default_factory=list, repr=False)


def template_pulse(coefficients: np.ndarray, duration: float, n_steps: int = DEFAULT_STEPS) -> PulseShape:
    t = np.linspace(0.0, duration, n_steps + 1)
    n = np.arange(1, len(coefficients) + 1)
    amp = (1 - np.cos(2 * np.pi * np.outer(t, n) / duration)) @ np.asarray(coefficients, dtype=float)
    return PulseShape(t, amp)


def _full_coefficients(free: np.ndarray, area: float, duration: float) -> np.ndarray:
    return np.concatenate([[area / duration - np.sum(free)], free])


def first_order_cost(pulse: PulseShape, control: np.ndarray, n_qubits: int, noise_axes) -> float:
    """Summed ``|R1|^2 / T^2`` of unit quasi-static noise on each axis (general frame route)."""
    noise = tuple(NoiseTerm({str(a): 1.0}) for a in noise_axes)
    sched = HamiltonianSchedule(n_qubits, (ControlTerm(pulse, control),), noise)
    frame = ToggleFrame(sched)
    total = 0.0
    for i in range(len(noise)):
        r1 = first_order_error(toggling_frame_curve(sched, i, frame), 1.0)
        total += float(r1 @ r1)
    return total / pulse.duration**2


class _SingleControlCost:
    """Closed form of :func:`first_order_cost` for ``H(t) = Omega(t) A``.

    With ``A = V diag(a) V^dag`` and the rotation angle ``theta(t)`` linear
    inside each step, the toggled noise integrates element-wise:
    ``M_mn = N_mn sum_k dt exp(i w_mn theta_k) phi(i w_mn Omega_k dt)`` with
    ``w_mn = a_m - a_n`` and ``phi(z) = (e^z - 1)/z``.  Then
    ``|R1|^2 = ||M||_F^2 / D``.
    """

    def __init__(self, control: np.ndarray, noise_axes):
        a, v = np.linalg.eigh(control)
        self.w = a[:, None] - a[None, :]
        self.noise = [v.conj().T @ pauli_matrix(str(ax)) @ v for ax in noise_axes]
        self.dim = len(a)

    def __call__(self, pulse: PulseShape) -> float:
        dt, omega = pulse.dt, pulse.midpoints()
        theta = np.concatenate([[0.0], np.cumsum(omega) * dt])[:-1]
        z = 1j * self.w[None] * (omega * dt)[:, None, None]
        small = np.abs(z) < 1e-12
        phi = np.where(small, 1.0, np.expm1(z) / np.where(small, 1.0, z))
        g = dt * np.sum(np.exp(1j * self.w[None] * theta[:, None, None]) * phi, axis=0)
        total = sum(np.sum(np.abs(n * g) ** 2) for n in self.noise) / self.dim
        return float(total) / pulse.duration**2


def optimize_first_order_pulse(target: str = "xx_halfpi", noise_axes=("IZ", "ZI"), n_coefficients: int = 5,
                               duration: float = 1.0, n_steps: int = DEFAULT_STEPS, seed: int = 0,
                               max_iter: int = 10_000, n_starts: int = 8,
                               required_reduction: float = 100.0) -> PulseOptimization:
    """Search for a pulse whose first-order error on ``noise_axes`` vanishes.

    Returns the best pulse found together with an honest success flag; the
    cosine pulse (``c_1`` only) is the baseline.  Noise that commutes with
    the control operator cannot be touched by amplitude modulation and is
    reported as a failure without searching.
    """
    if n_coefficients < 3:
        raise ValueError("need at least 3 Fourier coefficients")
    try:
        n_qubits, ctrl_terms, area = TARGETS[target]
    except KeyError:
        raise ValueError(f"unknown optimization target {target!r}") from None
    control = pauli_sum(ctrl_terms)
    target_u = scipy.linalg.expm(-1j * area * control)

    def build(free):
        return template_pulse(_full_coefficients(free, area, duration), duration, n_steps)

    def gate_error(pulse):
        return equal_up_to_phase(propagate_noiseless(
            HamiltonianSchedule(n_qubits, (ControlTerm(pulse, control),)))[-1], target_u)

    n_eval = 0

    fast_cost = _SingleControlCost(control, noise_axes)

    def cost(free):
        nonlocal n_eval
        n_eval += 1
        return fast_cost(build(free))

    zero = np.zeros(n_coefficients - 1)
    baseline = cost(zero)
    base_pulse = build(zero)
    if baseline < 1e-24:
        return PulseOptimization(base_pulse, True, baseline, baseline, gate_error(base_pulse),
                                 _full_coefficients(zero, area, duration), "baseline already first-order robust", n_eval)
    if all(commutes(lab, a) for a in noise_axes for lab in ctrl_terms):
        msg = "uncorrectable: every noise axis commutes with the control Hamiltonian"
        log.warning(msg)
        return PulseOptimization(base_pulse, False, baseline, baseline, gate_error(base_pulse),
                                 _full_coefficients(zero, area, duration), msg, n_eval)

    # every start runs; among robust solutions the smallest coefficient norm
    # (lowest drive power) wins, otherwise the lowest cost
    rng = np.random.default_rng(seed)
    scale = 4 * np.pi / duration
    robust_level = baseline / required_reduction**2
    best = (False, baseline, zero)
    history = []
    for _ in range(n_starts):
        x0 = rng.normal(0.0, scale, n_coefficients - 1)
        res = minimize(cost, x0, method="BFGS", options={"maxiter": max_iter, "gtol": 1e-12})
        res = minimize(cost, res.x, method="Nelder-Mead",
                       options={"maxiter": max_iter, "xatol": 1e-12, "fatol": 1e-30})
        history.append(float(res.fun))
        robust = res.fun < robust_level
        key = (robust, np.linalg.norm(res.x) if robust else res.fun)
        if not best[0] and (robust or res.fun < best[1]) or robust and key[1] < np.linalg.norm(best[2]):
            best = (robust, float(res.fun), res.x)
    free = best[2]
    pulse = build(free).scaled_to_area(area)
    final = first_order_cost(pulse, control, n_qubits, noise_axes)
    err = gate_error(pulse)
    ok = final <= baseline / required_reduction and err <= 1e-6
    msg = (f"cost reduced {baseline / max(final, 1e-300):.3g}x" if ok else
           f"optimizer did not reach a {required_reduction:g}x reduction (best {baseline / max(final, 1e-300):.3g}x)")
    if not ok:
        log.warning(msg)
    return PulseOptimization(pulse, ok, final, baseline, err, _full_coefficients(free, area, duration), msg,
                             n_eval, history)
