"""Toggling-frame error curves and Magnus error orders of a single gate.

Conventions: ``U(T) = U0(T) U_eps(T)`` and

    U_eps = exp(-i (R1 + R2) . sigma) + O(eps^3),
    R1 . sigma = int_0^T sum_i eps_i(s) U0^dag dH_i U0 ds,
    R2 . sigma = -(i/2) int_0^T [dPhi/ds, Phi(s)] ds,

i.e. the stored second order already contains the Magnus prefactor.

All integrals are taken over the same piecewise-constant model the
propagator steps through: inside step ``k`` the frame rotates exactly with
``exp(-i H_k s)``, so integrals of frame matrix elements ``B_ab exp(i D_ab s)``
are done in closed form (first order) or by Gauss-Legendre nodes on each step
(second order, filter functions).  Quadrature error is therefore at rounding
level for the discretized dynamics rather than ``O(dt^2)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .pauli import error_axes, error_vector_operator, expand_in_pauli_basis
from .schedule import HamiltonianSchedule, NoiseTerm, realization_samples

N_NODES = 8


def _phi1_integral(delta: np.ndarray, tau: np.ndarray | float) -> np.ndarray:
    """``int_0^tau exp(i delta s) ds`` without cancellation for small ``delta``."""
    z = 1j * delta * tau
    small = np.abs(delta) < 1e-300
    safe = np.where(small, 1.0, delta)
    return np.where(small, tau, np.expm1(z) / (1j * safe))


class ToggleFrame:
    """Eigen-data of every step of a schedule, shared by all its error curves."""

    def __init__(self, schedule: HamiltonianSchedule, n_nodes: int = N_NODES):
        self.schedule = schedule
        h = schedule.step_hamiltonians()
        self.lam, self.vecs = np.linalg.eigh(h)
        dt = schedule.dt
        steps = (self.vecs * np.exp(-1j * self.lam * dt)[:, None, :]) @ np.swapaxes(self.vecs.conj(), -1, -2)
        u = np.empty((schedule.n_steps + 1, schedule.dim, schedule.dim), dtype=complex)
        u[0] = np.eye(schedule.dim)
        for k, s in enumerate(steps):
            u[k + 1] = s @ u[k]
        self.u0 = u
        self.w = np.swapaxes(u[:-1].conj(), -1, -2) @ self.vecs
        x, wq = np.polynomial.legendre.leggauss(n_nodes)
        self.x = 0.5 * (x + 1)
        self.wq = 0.5 * wq
        self.delta = self.lam[:, :, None] - self.lam[:, None, :]
        self.node_phase = np.exp(1j * self.delta[:, None] * (dt * self.x)[None, :, None, None])
        self.partial = _phi1_integral(self.delta[:, None], (dt * self.x)[None, :, None, None])
        self.full = _phi1_integral(self.delta, dt)

    @property
    def n_qubits(self) -> int:
        return self.schedule.n_qubits

    @property
    def node_times(self) -> np.ndarray:
        t = self.schedule.times[:-1]
        return t[:, None] + self.schedule.dt * self.x[None, :]

    @property
    def node_weights(self) -> np.ndarray:
        return np.broadcast_to(self.schedule.dt * self.wq, (self.schedule.n_steps, len(self.wq)))

    def eigenbasis(self, op: np.ndarray) -> np.ndarray:
        """``V_k^dag op V_k`` for every step."""
        return np.swapaxes(self.vecs.conj(), -1, -2) @ op @ self.vecs

    def to_frame(self, b: np.ndarray) -> np.ndarray:
        """``W B W^dag`` for per-step (..., D, D) arrays in the step eigenbasis."""
        w = self.w if b.ndim == 3 else self.w[:, None]
        return w @ b @ np.swapaxes(w.conj(), -1, -2)

    def toggled_grid(self, op: np.ndarray) -> np.ndarray:
        return np.swapaxes(self.u0.conj(), -1, -2) @ op @ self.u0

    def toggled_nodes(self, op: np.ndarray) -> np.ndarray:
        return self.to_frame(self.eigenbasis(op)[:, None] * self.node_phase)


@dataclass
class ErrorCurve:
    """Toggling-frame derivative ``r'_j(t)`` of one noise term.

    ``rprime`` is sampled on the grid, ``rprime_nodes`` on the per-step
    quadrature nodes used for every integral over the curve.
    """

    noise_index: int
    noise: NoiseTerm
    frame: ToggleFrame = field(repr=False)
    rprime: np.ndarray = field(repr=False)
    rprime_nodes: np.ndarray = field(repr=False)
    profile: np.ndarray = field(repr=False)
    step_profile: np.ndarray = field(repr=False)

    @property
    def times(self) -> np.ndarray:
        return self.frame.schedule.times

    @property
    def duration(self) -> float:
        return self.frame.schedule.duration

    @property
    def n_qubits(self) -> int:
        return self.frame.n_qubits

    @property
    def axes(self) -> tuple[str, ...]:
        return error_axes(self.n_qubits)

    @property
    def process(self):
        return self.noise.process

    @property
    def node_times(self) -> np.ndarray:
        return self.frame.node_times

    @property
    def node_weights(self) -> np.ndarray:
        return self.frame.node_weights

    @cached_property
    def cumulative(self) -> np.ndarray:
        """``r_j(t_k) = int_0^{t_k} r'_j``, the curve itself."""
        per_step = np.einsum("kq,kqa->ka", self.node_weights, self.rprime_nodes)
        out = np.zeros_like(self.rprime)
        out[1:] = np.cumsum(per_step, axis=0)
        return out

    def speed(self) -> np.ndarray:
        return np.sqrt(np.sum(self.rprime**2, axis=1))


def toggling_frame_curve(schedule: HamiltonianSchedule, noise: NoiseTerm | int = 0,
                         frame: ToggleFrame | None = None) -> ErrorCurve:
    """Error curve of one noise term (given as a term or an index into ``schedule.noise``)."""
    if isinstance(noise, NoiseTerm):
        if noise in schedule.noise:
            idx = schedule.noise.index(noise)
        else:
            schedule = schedule.with_noise(schedule.noise + (noise,))
            idx = len(schedule.noise) - 1
            frame = None
    else:
        idx = noise
    frame = frame or ToggleFrame(schedule)
    nt = schedule.noise[idx]
    op = nt.operator
    grid = expand_in_pauli_basis(frame.toggled_grid(op))[:, 1:].real
    nodes = expand_in_pauli_basis(frame.toggled_nodes(op))[..., 1:].real
    return ErrorCurve(idx, nt, frame, grid, nodes, schedule.amplitude_profile(idx), schedule.step_profile(idx))


def error_curves(schedule: HamiltonianSchedule) -> list[ErrorCurve]:
    frame = ToggleFrame(schedule)
    return [toggling_frame_curve(schedule, i, frame) for i in range(len(schedule.noise))]


def _step_strengths(curve: ErrorCurve, realization) -> np.ndarray:
    vals = realization_samples(realization, 1, len(curve.times))[0]
    return 0.5 * (vals[1:] + vals[:-1]) * curve.step_profile


def first_order_error(curve: ErrorCurve, realization) -> np.ndarray:
    """``R_j = int_0^T eps(s) C(s) r'_j(s) ds`` (scalar realization = constant)."""
    eps = _step_strengths(curve, realization)
    return np.einsum("k,kq,kqa->a", eps, curve.node_weights, curve.rprime_nodes)


def _check_curve_set(curves: Sequence[ErrorCurve]) -> ToggleFrame:
    frame = curves[0].frame
    for c in curves[1:]:
        if c.frame is not frame:
            same = (c.frame.schedule.times.shape == frame.schedule.times.shape
                    and np.allclose(c.frame.schedule.times, frame.schedule.times))
            if not same:
                raise ValueError("error curves live on different grids")
    return frame


def _toggled_hamiltonian(curves, realizations):
    frame = _check_curve_set(curves)
    if len(realizations) != len(curves):
        raise ValueError("need one realization per curve")
    b = 0
    for c, r in zip(curves, realizations):
        b = b + _step_strengths(c, r)[:, None, None] * c.frame.eigenbasis(c.noise.operator)
    return frame, b


def magnus_phases(curves: Sequence[ErrorCurve], realizations: Sequence) -> tuple[np.ndarray, np.ndarray]:
    """First- and second-order error phase operators ``(R1.sigma, R2.sigma)``."""
    frame, b = _toggled_hamiltonian(curves, realizations)
    dt = frame.schedule.dt
    if np.ndim(b) == 0:
        z = np.zeros((frame.schedule.dim,) * 2, dtype=complex)
        return z, z.copy()
    steps = frame.to_frame(b * frame.full)
    phi_grid = np.zeros_like(steps)
    phi_grid[1:] = np.cumsum(steps[:-1], axis=0)
    phi1 = phi_grid[-1] + steps[-1]
    h_nodes = frame.to_frame(b[:, None] * frame.node_phase)
    phi_nodes = phi_grid[:, None] + frame.to_frame(b[:, None] * frame.partial)
    comm = h_nodes @ phi_nodes - phi_nodes @ h_nodes
    phi2 = -0.5j * dt * np.einsum("q,kqab->ab", frame.wq, comm)
    return phi1, phi2


def second_order_error(curves: Sequence[ErrorCurve], realizations: Sequence) -> np.ndarray:
    """Real second-order error vector, quadratic in the noise strengths."""
    _, phi2 = magnus_phases(curves, realizations)
    return expand_in_pauli_basis(phi2)[1:].real


@dataclass(frozen=True)
class MagnusOrders:
    """Error vectors by Magnus order (identity axis excluded)."""

    n_qubits: int
    R1: np.ndarray
    R2: np.ndarray
    R3: np.ndarray | None = None

    def __post_init__(self):
        n = 4**self.n_qubits - 1
        for name in ("R1", "R2", "R3"):
            v = getattr(self, name)
            if v is None:
                continue
            v = np.asarray(v, dtype=float)
            if v.shape != (n,):
                raise ValueError(f"{name} must have length {n}")
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{name} is not finite")
            object.__setattr__(self, name, v)

    @property
    def axes(self) -> tuple[str, ...]:
        return error_axes(self.n_qubits)

    @property
    def total(self) -> np.ndarray:
        return self.R1 + self.R2 + (0 if self.R3 is None else self.R3)

    @classmethod
    def single_axis(cls, n_qubits: int, components: dict, order: int = 1) -> "MagnusOrders":
        """Orders with the given ``{label: value}`` placed in ``R{order}``."""
        axes = error_axes(n_qubits)
        vec = np.zeros(len(axes))
        for lab, v in components.items():
            vec[axes.index(lab)] = v
        zero = np.zeros(len(axes))
        parts = {1: zero, 2: zero, 3: None}
        parts[order] = vec
        return cls(n_qubits, parts[1], parts[2], parts[3])


def magnus_orders(schedule: HamiltonianSchedule, realization, second_order: bool = True,
                  curves: Sequence[ErrorCurve] | None = None) -> MagnusOrders:
    """Error orders of a gate for one realization (scalar or per-term values)."""
    curves = error_curves(schedule) if curves is None else curves
    n = schedule.n_qubits
    if not curves:
        z = np.zeros(4**n - 1)
        return MagnusOrders(n, z, z)
    reals = realization_samples(realization, len(curves), len(schedule.times))
    if second_order:
        phi1, phi2 = magnus_phases(curves, list(reals))
        r1 = expand_in_pauli_basis(phi1)[1:].real
        r2 = expand_in_pauli_basis(phi2)[1:].real
    else:
        r1 = sum(first_order_error(c, r) for c, r in zip(curves, reals))
        r2 = np.zeros_like(r1)
    return MagnusOrders(n, r1, r2)


def error_unitary(orders: MagnusOrders, dps: int | None = None) -> np.ndarray:
    """``exp(-i (R1 + R2 [+ R3]) . sigma)``.

    With ``dps`` set the exponential is evaluated in mpmath at that many
    decimal digits and an object array of ``mpc`` is returned.
    """
    h = error_vector_operator(orders.total, orders.n_qubits)
    if dps is None:
        w, v = np.linalg.eigh(h)
        return (v * np.exp(-1j * w)) @ v.conj().T
    import mpmath

    with mpmath.workdps(dps):
        m = mpmath.matrix(h.tolist())
        e = mpmath.expm(-1j * m)
        return np.array(e.tolist(), dtype=object)
