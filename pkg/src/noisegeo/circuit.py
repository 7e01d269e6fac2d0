"""Layered circuits, front-propagated error trajectories, and the exact reference simulator."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .channel import ptm_of_unitary
from .geometry import error_curves, first_order_error, magnus_orders
from .pauli import error_axes, n_qubits_of
from .schedule import (Gate, HamiltonianSchedule, equal_up_to_phase, propagate_noiseless,
                       propagate_noisy, realization_samples)


@dataclass(frozen=True, eq=False)
class HardLayer:
    """Noisy gate: a schedule plus the ideal unitary it implements."""

    schedule: HamiltonianSchedule
    target: np.ndarray
    name: str = "hard"
    check: bool = True

    def __post_init__(self):
        if self.check:
            u0 = propagate_noiseless(self.schedule)[-1]
            err = equal_up_to_phase(u0, np.asarray(self.target))
            if err > 1e-8:
                raise ValueError(f"layer {self.name!r}: noiseless propagation misses target by {err:.3g}")

    @property
    def is_hard(self) -> bool:
        return True

    @property
    def unitary(self) -> np.ndarray:
        return self.target

    @cached_property
    def curves(self):
        return error_curves(self.schedule)

    def local_error(self, realization, second_order: bool = False) -> np.ndarray:
        """Local error step ``R_lo`` of this layer."""
        if not self.schedule.noise:
            return np.zeros(4**self.schedule.n_qubits - 1)
        if second_order:
            return magnus_orders(self.schedule, realization, curves=self.curves).total
        reals = realization_samples(realization, len(self.curves), len(self.schedule.times))
        return sum(first_order_error(c, r) for c, r in zip(self.curves, reals))

    def noisy_unitary(self, realization, refine: int = 1) -> np.ndarray:
        return propagate_noisy(self.schedule, realization, refine)


@dataclass(frozen=True, eq=False)
class EasyLayer:
    unitary: np.ndarray
    name: str = "easy"

    @property
    def is_hard(self) -> bool:
        return False


class Circuit:
    """Ordered hard/easy layers on ``n_qubits``; layers are applied left to right."""

    def __init__(self, n_qubits: int, layers: Sequence[HardLayer | EasyLayer]):
        self.n_qubits = n_qubits
        self.layers = tuple(layers)
        d = 2**n_qubits
        for layer in self.layers:
            u = np.asarray(layer.unitary)
            if u.shape != (d, d):
                raise ValueError(f"layer {layer.name!r} has shape {u.shape}, expected {(d, d)}")
            if layer.is_hard and layer.schedule.n_qubits != n_qubits:
                raise ValueError(f"layer {layer.name!r} acts on a different qubit count")

    @classmethod
    def from_gates(cls, gates: Sequence[Gate | Sequence[Gate]], n_qubits: int | None = None) -> "Circuit":
        flat = []
        for g in gates:
            flat.extend(g if isinstance(g, (list, tuple)) else [g])
        if n_qubits is None:
            n_qubits = n_qubits_of(np.asarray(flat[0].unitary))
        layers = [HardLayer(g.schedule, g.unitary, g.name) if g.is_hard else EasyLayer(g.unitary, g.name)
                  for g in flat]
        return cls(n_qubits, layers)

    def __len__(self):
        return len(self.layers)

    def __add__(self, other: "Circuit") -> "Circuit":
        return Circuit(self.n_qubits, self.layers + other.layers)

    def repeat(self, n: int) -> "Circuit":
        return Circuit(self.n_qubits, self.layers * n)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @property
    def hard_indices(self) -> list[int]:
        return [i for i, l in enumerate(self.layers) if l.is_hard]

    @property
    def n_hard(self) -> int:
        return len(self.hard_indices)

    def ideal_unitary(self) -> np.ndarray:
        u = np.eye(self.dim, dtype=complex)
        for layer in self.layers:
            u = layer.unitary @ u
        return u

    def merged(self) -> "Circuit":
        """Adjacent easy layers multiplied into one."""
        out = []
        for layer in self.layers:
            if not layer.is_hard and out and not out[-1].is_hard:
                prev = out.pop()
                layer = EasyLayer(layer.unitary @ prev.unitary, f"{prev.name}+{layer.name}")
            out.append(layer)
        return Circuit(self.n_qubits, out)


def per_layer(realizations, n_hard: int) -> list:
    """A ``list`` is one realization per hard layer; anything else is shared by all."""
    if isinstance(realizations, list):
        if len(realizations) != n_hard:
            raise ValueError(f"got {len(realizations)} realizations for {n_hard} hard layers")
        return realizations
    return [realizations] * n_hard


def layer_local_error(layer, realization, second_order: bool = False) -> np.ndarray:
    if not getattr(layer, "is_hard", False):
        raise TypeError("local error steps are defined for hard layers only")
    return layer.local_error(realization, second_order)


@dataclass
class ErrorTrajectory:
    """Front-propagated per-layer steps ``R^(i)`` and their running sum."""

    n_qubits: int
    steps: np.ndarray
    local_steps: np.ndarray = field(repr=False)

    @property
    def axes(self) -> tuple[str, ...]:
        return error_axes(self.n_qubits)

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.steps, axis=0)

    @property
    def distances(self) -> np.ndarray:
        return np.linalg.norm(self.cumulative, axis=1)

    @property
    def depth(self) -> int:
        return len(self.steps)


def propagate_error_front(circuit: Circuit, realizations, second_order: bool = False,
                          local_steps: Sequence[np.ndarray] | None = None) -> ErrorTrajectory:
    """Move every layer's error to the start of the circuit.

    Layer ``i`` acts as ``U0 exp(-i R_lo . sigma)``; with ``C`` the ideal
    circuit preceding it, ``exp(-i R_lo.s) C = C exp(-i C^dag (R_lo.s) C)``,
    so the front-propagated step is ``R_j = Tr(C^dag (R_lo.s) C s_j) / D``.
    ``local_steps`` may be passed to reuse precomputed ``R_lo`` values.
    """
    hard = circuit.hard_indices
    if local_steps is None:
        reals = per_layer(realizations, len(hard))
        local_steps = [circuit.layers[i].local_error(r, second_order) for i, r in zip(hard, reals)]
    local_steps = np.asarray(local_steps, dtype=float).reshape(len(hard), 4**circuit.n_qubits - 1)
    steps = np.empty_like(local_steps)
    c = np.eye(circuit.dim, dtype=complex)
    h = 0
    for layer in circuit.layers:
        if layer.is_hard:
            # coefficients of C^dag s_k C on s_j form PTM(C)^T
            steps[h] = ptm_of_unitary(c)[1:, 1:].T @ local_steps[h]
            h += 1
        c = layer.unitary @ c
    return ErrorTrajectory(circuit.n_qubits, steps, local_steps)


def total_error_phase(trajectory: ErrorTrajectory) -> tuple[np.ndarray, float]:
    if trajectory.depth == 0:
        raise ValueError("empty trajectory")
    total = trajectory.steps.sum(axis=0)
    return total, float(np.linalg.norm(total))


def simulate_exact(circuit: Circuit, realizations, initial_state: np.ndarray | None = None,
                   refine: int = 1):
    """Layer-by-layer noisy propagation.

    Returns the full circuit unitary, and the final state too when
    ``initial_state`` is given.
    """
    reals = per_layer(realizations, circuit.n_hard)
    u = np.eye(circuit.dim, dtype=complex)
    h = 0
    for layer in circuit.layers:
        if layer.is_hard:
            u = layer.noisy_unitary(reals[h], refine) @ u
            h += 1
        else:
            u = layer.unitary @ u
    if initial_state is None:
        return u
    psi = np.asarray(initial_state, dtype=complex)
    if psi.shape != (circuit.dim,):
        raise ValueError(f"state of shape {psi.shape} does not fit {circuit.n_qubits} qubits")
    if abs(np.linalg.norm(psi) - 1) > 1e-9:
        raise ValueError("initial state is not normalized")
    return u, u @ psi
