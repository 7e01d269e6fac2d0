"""Fidelities, randomized-compiling averages, and scaling-exponent fits."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .circuit import Circuit, per_layer, propagate_error_front
from .pauli import error_vector_operator, pauli_labels, pauli_matrix
from .twirl import ENUMERATION_CAP, TwirlAssignment, enumerate_twirl_average, sample_twirls

NORM_TOL = 1e-9


def _check_state(psi: np.ndarray, what: str) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim == 1:
        if abs(np.linalg.norm(psi) - 1) > NORM_TOL:
            raise ValueError(f"{what} is not normalized")
    elif psi.ndim == 2:
        if abs(np.trace(psi).real - 1) > NORM_TOL:
            raise ValueError(f"{what} does not have unit trace")
    else:
        raise ValueError(f"{what} must be a state vector or density matrix")
    return psi


def state_fidelity(state: np.ndarray, target: np.ndarray) -> float:
    """``<t|rho|t>`` for a density matrix, ``|<t|psi>|^2`` for a pure state."""
    state = _check_state(state, "state")
    target = _check_state(target, "target")
    if target.ndim != 1:
        raise ValueError("target must be a pure state vector")
    if state.ndim == 1:
        f = abs(np.vdot(target, state)) ** 2
    else:
        f = np.vdot(target, state @ target).real
    return float(np.clip(f, 0.0, 1.0))


def basis_state(bits: str) -> np.ndarray:
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[int(bits, 2)] = 1.0
    return psi


def worst_case_state(circuit: Circuit, realization=1.0) -> np.ndarray:
    """Input state with the largest first-order coherent infidelity.

    For a total front error ``A = R . s`` the bare infidelity of input
    ``psi`` is ``Var_psi(A)`` to leading order, maximised by the equal
    superposition of the extreme eigenvectors of ``A``.  Its twirled
    counterpart never exceeds ``|R|^2 <= max Var``, so this input exposes the
    worst case of the coherent channel.
    """
    total = propagate_error_front(circuit, realization).steps.sum(axis=0)
    if not np.any(total):
        psi = np.zeros(circuit.dim, dtype=complex)
        psi[0] = 1.0
        return psi
    _, vecs = np.linalg.eigh(error_vector_operator(total, circuit.n_qubits))
    psi = (vecs[:, 0] + vecs[:, -1]) / np.sqrt(2)
    # fix the global phase so the largest amplitude is real and positive
    k = np.argmax(np.abs(psi).round(12))
    return psi * np.exp(-1j * np.angle(psi[k]))


@dataclass
class FidelityEstimate:
    value: float
    stderr: float
    n_samples: int
    mode: str


def layer_unitaries(circuit: Circuit, realization) -> list[np.ndarray]:
    """Noisy unitary of every layer (easy layers are exact)."""
    reals = iter(per_layer(realization, circuit.n_hard))
    return [layer.noisy_unitary(next(reals)) if layer.is_hard else layer.unitary for layer in circuit.layers]


def twirled_unitary(circuit: Circuit, noisy: Sequence[np.ndarray], assignment: TwirlAssignment) -> np.ndarray:
    corr = iter(assignment.corrections(circuit))
    paulis = iter(assignment.paulis)
    u = np.eye(circuit.dim, dtype=complex)
    for layer, v in zip(circuit.layers, noisy):
        if layer.is_hard:
            u = next(corr) @ v @ pauli_matrix(next(paulis)) @ u
        else:
            u = v @ u
    return u


def _layerwise_state(circuit, noisy, rho, twirl_set):
    """Exact average over independent per-layer twirls, one layer at a time."""
    labels = pauli_labels(circuit.n_qubits) if twirl_set is None else tuple(twirl_set)
    ts = [pauli_matrix(p) for p in labels]
    for layer, v in zip(circuit.layers, noisy):
        if layer.is_hard:
            u0 = layer.target
            ks = np.array([u0 @ t.conj().T @ u0.conj().T @ v @ t for t in ts])
            rho = np.mean(ks @ rho @ np.swapaxes(ks.conj(), -1, -2), axis=0)
        else:
            rho = v @ rho @ v.conj().T
    return rho


def rc_average_fidelity(circuit: Circuit, noise_ensemble: Sequence, initial_state: np.ndarray,
                        target_state: np.ndarray | None = None, twirl_set: Sequence[str] | None = None,
                        mode: str = "enumerate", shots: int = 1000, seed: int = 0,
                        n_batches: int = 10) -> FidelityEstimate:
    """Fidelity of the output averaged over twirl assignments and noise realizations.

    Every entry of ``noise_ensemble`` is one run's realization (shared by all
    hard layers unless it is a per-layer ``list``).  Modes:

    ``enumerate``   all joint assignments (at most 4096), exact.
    ``layerwise``   exact average for twirls drawn independently per layer,
                    applied as a per-layer averaged channel.
    ``sample``      ``shots`` seeded draws per realization; standard error from
                    ``n_batches`` batch means.
    """
    psi = _check_state(initial_state, "initial state")
    if target_state is None:
        target_state = circuit.ideal_unitary() @ psi
    noise_ensemble = list(noise_ensemble)
    if not noise_ensemble:
        raise ValueError("empty noise ensemble")
    rho0 = np.outer(psi, psi.conj())

    if mode == "enumerate":
        assignments = enumerate_twirl_average(circuit, twirl_set, cap=ENUMERATION_CAP)
        rho = 0
        for r in noise_ensemble:
            noisy = layer_unitaries(circuit, r)
            us = np.array([twirled_unitary(circuit, noisy, a) for a, _ in assignments])
            outs = us @ psi
            rho = rho + np.einsum("na,nb->ab", outs, outs.conj()) / len(outs)
        rho = rho / len(noise_ensemble)
        return FidelityEstimate(state_fidelity(rho, target_state), 0.0, len(assignments) * len(noise_ensemble), mode)
    if mode == "layerwise":
        rho = 0
        for r in noise_ensemble:
            rho = rho + _layerwise_state(circuit, layer_unitaries(circuit, r), rho0, twirl_set)
        rho = rho / len(noise_ensemble)
        return FidelityEstimate(state_fidelity(rho, target_state), 0.0, len(noise_ensemble), mode)
    if mode == "sample":
        if shots < 1:
            raise ValueError("shots must be >= 1")
        outs = []
        for ri, r in enumerate(noise_ensemble):
            noisy = layer_unitaries(circuit, r)
            for s in range(shots):
                a = sample_twirls(circuit, seed, twirl_set, run_index=ri * shots + s)
                outs.append(twirled_unitary(circuit, noisy, a) @ psi)
        outs = np.array(outs)
        rho = np.einsum("na,nb->ab", outs, outs.conj()) / len(outs)
        per_shot = np.abs(outs @ target_state.conj()) ** 2
        batches = np.array_split(per_shot, min(n_batches, len(per_shot)))
        means = np.array([b.mean() for b in batches])
        se = float(means.std(ddof=1) / np.sqrt(len(means))) if len(means) > 1 else float("nan")
        return FidelityEstimate(state_fidelity(rho, target_state), se, len(outs), mode)
    raise ValueError(f"unknown mode {mode!r}")


def bare_fidelity(circuit: Circuit, noise_ensemble: Sequence, initial_state, target_state=None) -> FidelityEstimate:
    """Ensemble fidelity without twirls."""
    ident = ("I" * circuit.n_qubits,)
    return rc_average_fidelity(circuit, noise_ensemble, initial_state, target_state, ident, mode="layerwise")


# ---------------------------------------------------------------------------
# scaling fits

@dataclass
class ScalingSeries:
    x: np.ndarray
    y: np.ndarray
    spread: np.ndarray | None = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.shape != self.y.shape:
            raise ValueError("x and y must have the same length")


@dataclass
class ScalingFit:
    exponent: float
    stderr: float
    ci95: float
    prefactor: float
    n_points: int
    excluded: int


def fit_scaling_exponent(series: ScalingSeries, exclude_first: int = 0) -> ScalingFit:
    """Least-squares slope of ``log y`` against ``log x``.

    The first ``exclude_first`` points are dropped before fitting.  At least
    six remaining points spanning a decade in ``x`` are required.
    """
    x, y = series.x[exclude_first:], series.y[exclude_first:]
    if np.any(x <= 0) or np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise ValueError("scaling fit needs positive, finite values")
    if len(x) < 6 or x.max() / x.min() < 10:
        raise ValueError("scaling fit needs >= 6 points spanning at least one decade")
    res = stats.linregress(np.log(x), np.log(y))
    t = stats.t.ppf(0.975, len(x) - 2)
    return ScalingFit(float(res.slope), float(res.stderr), float(t * res.stderr), float(np.exp(res.intercept)),
                      len(x), exclude_first)
