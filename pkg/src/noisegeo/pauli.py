"""Generalized Pauli algebra on m qubits.

Labels are strings over ``IXYZ``; the integer index is the base-4 number with
``I=0, X=1, Y=2, Z=3`` and the leftmost qubit most significant.  All matrices
use the un-normalized Paulis together with the ``(1/D) Tr`` inner product.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Mapping

import numpy as np

SYMBOLS = "IXYZ"

_SINGLE = {
    "I": np.array([[1, 0], [0, 1]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# single-site products a*b = phase * c
_SITE_MUL = {}
for _a in SYMBOLS:
    for _b in SYMBOLS:
        _m = _SINGLE[_a] @ _SINGLE[_b]
        for _c in SYMBOLS:
            _ph = np.trace(_SINGLE[_c].conj().T @ _m) / 2
            if abs(abs(_ph) - 1) < 1e-12:
                _SITE_MUL[_a, _b] = (complex(np.round(_ph.real) + 1j * np.round(_ph.imag)), _c)
                break


@dataclass(frozen=True)
class PauliString:
    """A tensor product of single-qubit Paulis, e.g. ``PauliString("XZ")``."""

    label: str

    def __post_init__(self):
        if not self.label or any(s not in SYMBOLS for s in self.label):
            raise ValueError(f"invalid Pauli label {self.label!r}")

    @classmethod
    def from_index(cls, index: int, n_qubits: int) -> "PauliString":
        if not 0 <= index < 4**n_qubits:
            raise ValueError(f"index {index} out of range for {n_qubits} qubits")
        digits = []
        for _ in range(n_qubits):
            index, r = divmod(index, 4)
            digits.append(SYMBOLS[r])
        return cls("".join(reversed(digits)))

    @property
    def n_qubits(self) -> int:
        return len(self.label)

    @property
    def index(self) -> int:
        idx = 0
        for s in self.label:
            idx = 4 * idx + SYMBOLS.index(s)
        return idx

    @property
    def weight(self) -> int:
        return sum(s != "I" for s in self.label)

    def is_identity(self) -> bool:
        return self.weight == 0

    def matrix(self) -> np.ndarray:
        return pauli_matrix(self.label)

    def __mul__(self, other: "PauliString"):
        return pauli_mul(self, other)

    def __str__(self):
        return self.label


def _as_pauli(p) -> PauliString:
    return p if isinstance(p, PauliString) else PauliString(p)


def _check_same(a: PauliString, b: PauliString):
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"qubit count mismatch: {a.label!r} vs {b.label!r}")


@lru_cache(maxsize=None)
def _pauli_matrix(label: str) -> np.ndarray:
    m = np.ones((1, 1), dtype=complex)
    for s in label:
        m = np.kron(m, _SINGLE[s])
    m.setflags(write=False)
    return m


def pauli_matrix(label) -> np.ndarray:
    """Dense matrix of a Pauli string (read-only, cached)."""
    return _pauli_matrix(_as_pauli(label).label)


@lru_cache(maxsize=None)
def pauli_labels(n_qubits: int) -> tuple[str, ...]:
    """All ``4**n`` labels in index order."""
    return tuple("".join(p) for p in product(SYMBOLS, repeat=n_qubits))


@lru_cache(maxsize=None)
def _basis(n_qubits: int) -> np.ndarray:
    b = np.stack([_pauli_matrix(lab) for lab in pauli_labels(n_qubits)])
    b.setflags(write=False)
    return b


def pauli_basis(n_qubits: int) -> np.ndarray:
    """Stack of all Pauli matrices, shape ``(4**n, D, D)``."""
    return _basis(n_qubits)


def error_axes(n_qubits: int) -> tuple[str, ...]:
    """Labels of the error-space axes (identity excluded)."""
    return pauli_labels(n_qubits)[1:]


def pauli_mul(a, b) -> tuple[complex, PauliString]:
    """Product ``a*b = phase * c`` with ``phase`` in ``{1, -1, 1j, -1j}``."""
    a, b = _as_pauli(a), _as_pauli(b)
    _check_same(a, b)
    phase = 1 + 0j
    out = []
    for sa, sb in zip(a.label, b.label):
        ph, c = _SITE_MUL[sa, sb]
        phase *= ph
        out.append(c)
    return phase, PauliString("".join(out))


def commutes(a, b) -> bool:
    a, b = _as_pauli(a), _as_pauli(b)
    _check_same(a, b)
    n_anti = sum(x != "I" and y != "I" and x != y for x, y in zip(a.label, b.label))
    return n_anti % 2 == 0


@lru_cache(maxsize=None)
def _commutation_table(n_qubits: int) -> np.ndarray:
    labels = pauli_labels(n_qubits)
    tab = np.array([[commutes(a, b) for b in labels] for a in labels])
    tab.setflags(write=False)
    return tab


def commutation_table(n_qubits: int) -> np.ndarray:
    """Boolean matrix ``C[a, b] = commutes(a, b)`` over all Pauli indices."""
    return _commutation_table(n_qubits)


def n_qubits_of(matrix: np.ndarray) -> int:
    d = matrix.shape[-1]
    if matrix.shape[-2] != d or d < 2 or d & (d - 1):
        raise ValueError(f"operator dimension {matrix.shape} is not 2^m x 2^m")
    return d.bit_length() - 1


def expand_in_pauli_basis(matrix: np.ndarray) -> np.ndarray:
    """Coefficients ``c_j = Tr(sigma_j M) / D`` for every Pauli index.

    Works on a single ``(D, D)`` matrix or a stack ``(..., D, D)``; the
    result has shape ``(..., 4**m)``.
    """
    matrix = np.asarray(matrix)
    m = n_qubits_of(matrix)
    d = 2**m
    # Tr(s_j M) = sum_ab s_j[a, b] M[b, a]
    return np.einsum("jab,...ba->...j", _basis(m), matrix) / d


def from_pauli_coefficients(coeffs: np.ndarray, n_qubits: int) -> np.ndarray:
    """Inverse of :func:`expand_in_pauli_basis`."""
    return np.einsum("...j,jab->...ab", coeffs, _basis(n_qubits))


def error_vector_operator(vector: np.ndarray, n_qubits: int) -> np.ndarray:
    """Hermitian operator ``R . sigma`` for an error-space vector (no identity)."""
    vector = np.asarray(vector)
    if vector.shape[-1] != 4**n_qubits - 1:
        raise ValueError("error vector length must be 4**m - 1")
    return np.einsum("...j,jab->...ab", vector, _basis(n_qubits)[1:])


def pauli_sum(terms: Mapping[str, float]) -> np.ndarray:
    """Matrix of a real combination of Pauli strings, e.g. ``{"IZ": 1, "ZI": -1}``."""
    if not terms:
        raise ValueError("empty Pauli sum")
    lengths = {len(k) for k in terms}
    if len(lengths) != 1:
        raise ValueError("Pauli sum mixes qubit counts")
    return sum(c * pauli_matrix(lab) for lab, c in terms.items())


def embed(op: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """Place a single-qubit operator on ``qubit`` (0 = leftmost)."""
    mats = [np.eye(2, dtype=complex)] * n_qubits
    mats[qubit] = np.asarray(op, dtype=complex)
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out
