"""Pauli transfer matrices of noise channels and their perturbative twirled diagonal.

A PTM is a real ``4^m x 4^m`` array with entries
``P_jk = Tr(s_j E(s_k)) / D`` in the Pauli index order of :mod:`noisegeo.pauli`.
"""
from __future__ import annotations

from contextlib import nullcontext
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .pauli import commutation_table, n_qubits_of, pauli_basis, pauli_labels, pauli_matrix


def _to_mp(a: np.ndarray) -> np.ndarray:
    import mpmath

    if a.dtype == object:
        return a
    return np.vectorize(lambda z: mpmath.mpc(complex(z)), otypes=[object])(a)


def _mp_context(dps):
    if dps is None:
        return nullcontext()
    import mpmath

    return mpmath.workdps(dps)


def ptm_of_unitary(u: np.ndarray) -> np.ndarray:
    """PTM of ``rho -> U rho U^dag``; accepts a stack ``(..., D, D)``.

    Object arrays (mpmath numbers) are handled element-wise and return an
    object array of real ``mpf`` entries; call under ``mpmath.workdps``.
    """
    u = np.asarray(u)
    n = n_qubits_of(u)
    d = 2**n
    basis = pauli_basis(n)
    if u.dtype == object:
        b = _to_mp(basis)
        udag = u.conj().T
        images = [u @ b[k] @ udag for k in range(len(b))]
        out = np.empty((len(b), len(b)), dtype=object)
        for j in range(len(b)):
            bj_t = b[j].T
            for k in range(len(b)):
                out[j, k] = (np.sum(bj_t * images[k]) / d).real
        return out
    images = u[..., None, :, :] @ basis @ np.swapaxes(u.conj(), -1, -2)[..., None, :, :]
    return np.einsum("jab,...kba->...jk", basis, images).real / d


def exact_ptm(source, dps: int | None = None) -> np.ndarray:
    """PTM of a unitary channel, or the equal-weight average over an ensemble.

    ``source`` is one unitary ``(D, D)`` or a sequence/stack of unitaries.
    With ``dps`` the computation runs in mpmath at that precision.
    """
    if isinstance(source, np.ndarray) and source.ndim == 2:
        source = [source]
    source = list(source)
    if not source:
        raise ValueError("empty ensemble")
    with _mp_context(dps):
        if dps is not None or any(np.asarray(u).dtype == object for u in source):
            acc = None
            for u in source:
                p = ptm_of_unitary(_to_mp(np.asarray(u)))
                acc = p if acc is None else acc + p
            return acc / len(source)
        stack = np.asarray(source, dtype=complex)
        # np.sum uses pairwise summation along the ensemble axis: order-stable
        return np.sum(ptm_of_unitary(stack), axis=0) / len(source)


def dressed_unitaries(u_err: np.ndarray, twirl_set: Sequence[str] | None = None) -> list:
    """``T^dag U_eps T`` for every twirl ``T`` in the set (default: all Paulis)."""
    n = n_qubits_of(np.asarray(u_err))
    labels = pauli_labels(n) if twirl_set is None else tuple(twirl_set)
    if not labels:
        raise ValueError("empty twirl set")
    u_err = np.asarray(u_err)
    out = []
    for lab in labels:
        t = pauli_matrix(lab)
        if u_err.dtype == object:
            t = _to_mp(np.asarray(t))
        out.append(t.conj().T @ u_err @ t)
    return out


def twirled_ptm(u_err: np.ndarray, twirl_set: Sequence[str] | None = None, dps: int | None = None) -> np.ndarray:
    """Exact twirl average of a coherent error channel by enumeration."""
    with _mp_context(dps):
        src = _to_mp(np.asarray(u_err)) if dps is not None else u_err
        return exact_ptm(dressed_unitaries(src, twirl_set), dps=dps)


@dataclass
class ChannelExpansion:
    """Perturbative diagonal of the twirled channel, ``1 + sum_n terms[n]``."""

    n_qubits: int
    terms: dict = field(default_factory=dict)

    @property
    def labels(self) -> tuple[str, ...]:
        return pauli_labels(self.n_qubits)

    @property
    def deviation(self) -> np.ndarray:
        out = 0
        for v in self.terms.values():
            out = out + v
        return out

    @property
    def coefficients(self) -> np.ndarray:
        return 1.0 + self.deviation

    def coefficient(self, label: str) -> float:
        return float(self.coefficients[self.labels.index(label)])


def analytic_twirled_diagonal(orders, through_order: int = 4, dps: int | None = None) -> ChannelExpansion:
    """Twirled PTM diagonal assembled from Magnus orders up to ``eps^through_order``.

    Stored orders satisfy ``U_eps = exp(-i (R1 + R2 + R3).s)``; in factorial
    form ``exp(-i sum_n R^[n]/n! . s)`` that is ``R^[2] = 2 R2`` and
    ``R^[3] = 6 R3``.  For Pauli axis ``P`` (sums over axes anticommuting
    with ``P``):

    * order 2: ``-2 sum R1_i^2``
    * order 3: ``-2 sum R1_i R^[2]_i``
    * order 4: ``sum (2/3) R1_i (R1_i^3 - R^[3]_i) - (R^[2]_i)^2 / 2``
      plus ``2 (R1_i R1_j)^2`` over ordered pairs ``i != j`` of mutually
      commuting axes.

    With ``dps`` the sums are formed in mpmath (object arrays), which is
    needed when comparing sixth-order residuals against an exact reference.
    """
    if through_order not in (2, 3, 4):
        raise ValueError("through_order must be 2, 3 or 4")
    n = orders.n_qubits
    comm = commutation_table(n)
    anti = ~comm[:, 1:]  # (all P, error axes)
    r1 = orders.R1
    r2 = 2.0 * orders.R2
    r3 = np.zeros_like(r1) if orders.R3 is None else 6.0 * orders.R3
    if dps is not None:
        import mpmath

        with mpmath.workdps(dps):
            to_mp = np.vectorize(mpmath.mpf, otypes=[object])
            r1, r2, r3 = to_mp(r1), to_mp(r2), to_mp(r3)
            anti, comm = anti.astype(int).astype(object), comm.astype(int).astype(object)
            return _diagonal_terms(n, anti, comm, r1, r2, r3, through_order)
    return _diagonal_terms(n, anti, comm, r1, r2, r3, through_order)


def _diagonal_terms(n, anti, comm, r1, r2, r3, through_order) -> ChannelExpansion:
    terms = {2: -2.0 * anti @ (r1 * r1)}
    if through_order >= 3:
        terms[3] = -2.0 * anti @ (r1 * r2)
    if through_order >= 4:
        single = anti @ ((2.0 / 3.0) * r1 * (r1**3 - r3) - 0.5 * r2 * r2)
        a = anti * (r1 * r1)[None, :]
        pair_ok = comm[1:, 1:] * (1 - np.eye(len(r1), dtype=int))
        pairs = 2.0 * ((a @ pair_ok) * a).sum(axis=1)
        terms[4] = single + pairs
    return ChannelExpansion(n, terms)


def average_gate_fidelity(ptm: np.ndarray) -> float:
    d = int(round(np.sqrt(ptm.shape[0])))
    return float((np.trace(ptm) + d) / (d * d + d))


def ptm_diagnostics(ptm: np.ndarray) -> dict:
    ptm = np.asarray(ptm, dtype=float)
    off = ptm - np.diag(np.diag(ptm))
    return {
        "max_offdiagonal": float(np.max(np.abs(off))),
        "diagonal": np.diag(ptm).copy(),
        "average_gate_fidelity": average_gate_fidelity(ptm),
        "trace_preserving_error": float(np.max(np.abs(ptm[0] - np.eye(len(ptm))[0]))),
    }


def ptm_labels(n_qubits: int) -> tuple[str, ...]:
    return pauli_labels(n_qubits)

