"""Pauli twirls around hard layers: sampling, insertion, and exhaustive enumeration."""
from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from .circuit import Circuit, EasyLayer
from .pauli import PauliString, commutes, error_axes, pauli_labels, pauli_matrix

ENUMERATION_CAP = 4096


def layer_rng(master_seed: int, run_index: int, layer_index: int) -> np.random.Generator:
    """Counter-based stream: depends only on (seed, run, layer), not on call order."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(run_index, layer_index)))


def _twirl_set(n_qubits: int, twirl_set) -> tuple[str, ...]:
    labels = pauli_labels(n_qubits) if twirl_set is None else tuple(str(PauliString(str(t))) for t in twirl_set)
    if not labels:
        raise ValueError("empty twirl set")
    if any(len(t) != n_qubits for t in labels):
        raise ValueError(f"twirl set must contain {n_qubits}-qubit Paulis")
    return labels


@dataclass(frozen=True)
class TwirlAssignment:
    """One Pauli label per hard layer (in order) plus the seed it came from."""

    paulis: tuple[str, ...]
    master_seed: int | None = None
    run_index: int | None = None

    def to_json(self) -> str:
        return json.dumps({"master_seed": self.master_seed, "run_index": self.run_index,
                           "layers": {str(i): p for i, p in enumerate(self.paulis)}}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TwirlAssignment":
        d = json.loads(text)
        layers = d["layers"]
        return cls(tuple(layers[str(i)] for i in range(len(layers))), d.get("master_seed"), d.get("run_index"))

    def corrections(self, circuit: Circuit) -> list[np.ndarray]:
        """``Tc = U0 T^dag U0^dag`` for every hard layer, from the stored ideal ``U0``."""
        out = []
        for i, p in zip(circuit.hard_indices, self.paulis):
            u0 = circuit.layers[i].target
            t = pauli_matrix(p)
            out.append(u0 @ t.conj().T @ u0.conj().T)
        return out


def sample_twirls(circuit: Circuit, master_seed: int, twirl_set: Sequence[str] | None = None,
                  run_index: int = 0) -> TwirlAssignment:
    labels = _twirl_set(circuit.n_qubits, twirl_set)
    picks = tuple(labels[layer_rng(master_seed, run_index, h).integers(len(labels))]
                  for h in range(circuit.n_hard))
    return TwirlAssignment(picks, master_seed, run_index)


def apply_twirls(circuit: Circuit, assignment: TwirlAssignment) -> Circuit:
    """Insert ``T`` before and ``Tc`` after every hard layer, merged into easy layers."""
    if len(assignment.paulis) != circuit.n_hard:
        raise ValueError(f"assignment covers {len(assignment.paulis)} layers, circuit has {circuit.n_hard} hard layers")
    corr = iter(assignment.corrections(circuit))
    paulis = iter(assignment.paulis)
    layers = []
    for layer in circuit.layers:
        if layer.is_hard:
            p = next(paulis)
            layers += [EasyLayer(pauli_matrix(p), f"T:{p}"), layer, EasyLayer(next(corr), f"Tc:{p}")]
        else:
            layers.append(layer)
    return Circuit(circuit.n_qubits, layers).merged()


def dressed_error(local_error: np.ndarray, pauli: str) -> np.ndarray:
    """``T^dag (R.s) T``: component ``j`` flips sign iff ``T`` anticommutes with ``s_j``."""
    axes = error_axes(len(pauli))
    signs = np.array([1.0 if commutes(pauli, a) else -1.0 for a in axes])
    return signs * np.asarray(local_error)


def enumerate_twirl_average(circuit_or_layers, twirl_set: Sequence[str] | None = None,
                            n_qubits: int | None = None, cap: int = ENUMERATION_CAP):
    """Every joint assignment with its (equal) weight.

    Accepts a circuit, or a number of hard layers together with ``n_qubits``.
    """
    if isinstance(circuit_or_layers, Circuit):
        n_hard, n_qubits = circuit_or_layers.n_hard, circuit_or_layers.n_qubits
    else:
        n_hard = int(circuit_or_layers)
        if n_qubits is None:
            raise ValueError("n_qubits is required when passing a layer count")
    labels = _twirl_set(n_qubits, twirl_set)
    total = len(labels) ** n_hard
    if total > cap:
        raise ValueError(f"{total} assignments exceed the enumeration cap of {cap}")
    w = 1.0 / total
    return [(TwirlAssignment(combo), w) for combo in product(labels, repeat=n_hard)]
