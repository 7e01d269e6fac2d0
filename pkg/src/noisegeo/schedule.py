"""Time-dependent control Hamiltonians and their propagation.

Every schedule lives on a uniform grid ``t_k = k*dt``.  Within step ``k`` the
Hamiltonian is frozen at its midpoint value (average of the two bracketing
samples), so the noiseless propagator is a product of exact exponentials and
is unitary to rounding error.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg

from .pauli import embed, n_qubits_of, pauli_matrix, pauli_sum
from .spectra import NoiseProcess, QuasiStatic

log = logging.getLogger(__name__)

MIN_SAMPLES = 16
DEFAULT_STEPS = 512


@dataclass(frozen=True)
class PulseShape:
    """Real control amplitude sampled on a uniform grid over ``[0, T]``."""

    times: np.ndarray
    amplitude: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        a = np.asarray(self.amplitude, dtype=float)
        if t.ndim != 1 or t.shape != a.shape:
            raise ValueError("times and amplitude must be 1-d arrays of equal length")
        if len(t) < MIN_SAMPLES:
            raise ValueError(f"pulse needs at least {MIN_SAMPLES} samples, got {len(t)}")
        steps = np.diff(t)
        if np.any(steps <= 0):
            raise ValueError("pulse grid must be strictly increasing")
        if np.max(np.abs(steps - steps.mean())) > 1e-6 * steps.mean():
            raise ValueError("pulse grid is not uniform")
        if abs(t[0]) > 1e-12 * max(1.0, abs(t[-1])):
            raise ValueError("pulse grid must start at t=0")
        t.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "amplitude", a)

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    @property
    def duration(self) -> float:
        return float(self.times[-1])

    @property
    def dt(self) -> float:
        return self.duration / self.n_steps

    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.amplitude[1:] + self.amplitude[:-1])

    def area(self) -> float:
        # sum of midpoint amplitudes * dt: the rotation angle the stepper applies
        return float(np.sum(self.midpoints()) * self.dt)

    def scaled_to_area(self, area: float) -> "PulseShape":
        current = self.area()
        if current == 0:
            raise ValueError("cannot rescale a zero-area pulse")
        return PulseShape(self.times, self.amplitude * (area / current))

    @classmethod
    def from_function(cls, func, duration: float, n_steps: int = DEFAULT_STEPS) -> "PulseShape":
        t = np.linspace(0.0, duration, n_steps + 1)
        return cls(t, np.asarray(func(t), dtype=float) * np.ones_like(t))

    @classmethod
    def constant(cls, value: float, duration: float, n_steps: int = DEFAULT_STEPS) -> "PulseShape":
        return cls.from_function(lambda t: np.full_like(t, value), duration, n_steps)

    @classmethod
    def cosine(cls, duration: float, area: float, n_steps: int = DEFAULT_STEPS) -> "PulseShape":
        """``A (1 - cos(2 pi t / T))`` normalized to the requested area."""
        p = cls.from_function(lambda t: 1 - np.cos(2 * np.pi * t / duration), duration, n_steps)
        return p.scaled_to_area(area)

    def resampled(self, n_steps: int) -> "PulseShape":
        t = np.linspace(0.0, self.duration, n_steps + 1)
        return PulseShape(t, np.interp(t, self.times, self.amplitude))


@dataclass(frozen=True)
class ControlTerm:
    pulse: PulseShape
    operator: np.ndarray
    name: str = ""

    def __post_init__(self):
        op = np.asarray(self.operator, dtype=complex)
        n_qubits_of(op)
        if not np.allclose(op, op.conj().T, atol=1e-12):
            raise ValueError(f"control operator {self.name!r} is not Hermitian")
        op.setflags(write=False)
        object.__setattr__(self, "operator", op)


@dataclass(frozen=True)
class NoiseTerm:
    """Noise operator ``dH`` with its strength process ``eps(t)``.

    ``terms`` is a real Pauli combination such as ``{"IZ": 1, "ZI": -1}``.
    With ``control`` set to a control index the coupling is multiplicative:
    the effective strength is ``eps(t) * Omega_control(t)``.
    """

    terms: Mapping[str, float]
    process: NoiseProcess = field(default_factory=QuasiStatic)
    control: int | None = None
    name: str = ""

    def __post_init__(self):
        terms = {str(k): float(v) for k, v in dict(self.terms).items()}
        object.__setattr__(self, "terms", terms)
        pauli_sum(terms)

    @property
    def n_qubits(self) -> int:
        return len(next(iter(self.terms)))

    @property
    def operator(self) -> np.ndarray:
        return pauli_sum(self.terms)

    @property
    def coupling(self) -> str:
        return "additive" if self.control is None else f"multiplicative({self.control})"


@dataclass(frozen=True)
class HamiltonianSchedule:
    """``H(t) = sum_c Omega_c(t) O_c + sum_i eps_i(t) dH_i`` on a shared grid."""

    n_qubits: int
    controls: tuple[ControlTerm, ...]
    noise: tuple[NoiseTerm, ...] = ()
    times: np.ndarray | None = None

    def __post_init__(self):
        controls = tuple(self.controls)
        noise = tuple(self.noise)
        object.__setattr__(self, "controls", controls)
        object.__setattr__(self, "noise", noise)
        d = 2**self.n_qubits
        if controls:
            t = controls[0].pulse.times
        elif self.times is not None:
            t = np.asarray(self.times, dtype=float)
            PulseShape(t, np.zeros_like(t))
        else:
            raise ValueError("schedule needs either a control term or an explicit grid")
        for c in controls:
            if c.operator.shape != (d, d):
                raise ValueError(f"control {c.name!r} has wrong dimension for {self.n_qubits} qubits")
            if c.pulse.times.shape != t.shape or not np.allclose(c.pulse.times, t, rtol=0, atol=1e-12 * t[-1]):
                raise ValueError("all control pulses must share one grid")
        for nt in noise:
            if nt.n_qubits != self.n_qubits:
                raise ValueError(f"noise term {nt.name!r} acts on {nt.n_qubits} qubits")
            if nt.control is not None and not 0 <= nt.control < len(controls):
                raise ValueError(f"noise term {nt.name!r} refers to missing control {nt.control}")
        object.__setattr__(self, "times", t)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    @property
    def duration(self) -> float:
        return float(self.times[-1])

    @property
    def dt(self) -> float:
        return self.duration / self.n_steps

    def with_noise(self, noise: Sequence[NoiseTerm]) -> "HamiltonianSchedule":
        return HamiltonianSchedule(self.n_qubits, self.controls, tuple(noise), self.times)

    def step_hamiltonians(self) -> np.ndarray:
        """Midpoint noiseless Hamiltonian of every step, shape ``(N, D, D)``."""
        h = np.zeros((self.n_steps, self.dim, self.dim), dtype=complex)
        for c in self.controls:
            h += c.pulse.midpoints()[:, None, None] * c.operator
        return h

    def amplitude_profile(self, i: int) -> np.ndarray:
        """Noise amplitude factor ``C(t)`` of term ``i`` on the grid."""
        nt = self.noise[i]
        if nt.control is None:
            return np.ones_like(self.times)
        return self.controls[nt.control].pulse.amplitude

    def step_profile(self, i: int) -> np.ndarray:
        nt = self.noise[i]
        if nt.control is None:
            return np.ones(self.n_steps)
        return self.controls[nt.control].pulse.midpoints()

    def noise_steps(self, realization) -> np.ndarray:
        """Effective per-step strengths ``eps_i C_i``, shape ``(n_noise, N)``.

        ``realization`` holds, per noise term, either a scalar (constant over
        the gate) or samples on the grid.
        """
        vals = realization_samples(realization, len(self.noise), len(self.times))
        mids = 0.5 * (vals[:, 1:] + vals[:, :-1])
        for i in range(len(self.noise)):
            mids[i] *= self.step_profile(i)
        return mids


def realization_samples(realization, n_terms: int, n_points: int) -> np.ndarray:
    """Normalize a realization to an array of shape ``(n_terms, n_points)``."""
    samples = getattr(realization, "samples", realization)
    if np.ndim(samples) == 0:
        rows = [samples] * n_terms
    elif isinstance(samples, np.ndarray) and samples.ndim == 1 and samples.shape == (n_points,) and n_terms == 1:
        rows = [samples]
    else:
        rows = list(samples)
    if len(rows) != n_terms:
        raise ValueError(f"realization has {len(rows)} entries for {n_terms} noise terms")
    out = np.empty((n_terms, n_points))
    for i, r in enumerate(rows):
        r = np.asarray(r, dtype=float)
        if r.ndim == 0:
            out[i] = float(r)
        elif r.shape == (n_points,):
            out[i] = r
        else:
            raise ValueError(f"realization for term {i} has shape {r.shape}, grid has {n_points} points")
    return out


def expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i h t)`` for a stack of Hermitian matrices via eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)[..., None, :]) @ np.swapaxes(v.conj(), -1, -2)


def propagate_noiseless(schedule: HamiltonianSchedule) -> np.ndarray:
    """Primary propagator ``U0(t_k)`` at every grid point, shape ``(N+1, D, D)``."""
    steps = expm_hermitian(schedule.step_hamiltonians(), schedule.dt)
    u = np.empty((schedule.n_steps + 1, schedule.dim, schedule.dim), dtype=complex)
    u[0] = np.eye(schedule.dim)
    for k, s in enumerate(steps):
        u[k + 1] = s @ u[k]
    return u


def propagate_noisy(schedule: HamiltonianSchedule, realization, refine: int = 1) -> np.ndarray:
    """Full propagator ``U(T)`` of ``H0 + sum eps_i dH_i``.

    This is the reference the perturbative machinery is checked against, so it
    deliberately uses a different exponential (scipy's Pade ``expm``).  With
    ``refine > 1`` pulses and noise samples are linearly interpolated onto a
    grid ``refine`` times finer.
    """
    if refine < 1:
        raise ValueError("refine must be >= 1")
    sched = schedule
    samples = realization_samples(realization, len(schedule.noise), len(schedule.times))
    if refine > 1:
        n = schedule.n_steps * refine
        t = np.linspace(0.0, schedule.duration, n + 1)
        controls = tuple(ControlTerm(PulseShape(t, np.interp(t, schedule.times, c.pulse.amplitude)), c.operator, c.name)
                         for c in schedule.controls)
        sched = HamiltonianSchedule(schedule.n_qubits, controls, schedule.noise, t)
        samples = np.array([np.interp(t, schedule.times, s) for s in samples])
    h = sched.step_hamiltonians()
    if sched.noise:
        eps = sched.noise_steps(samples)
        for i, nt in enumerate(sched.noise):
            h = h + eps[i][:, None, None] * nt.operator
    u = np.eye(sched.dim, dtype=complex)
    for hk in h:
        u = scipy.linalg.expm(-1j * sched.dt * hk) @ u
    return u


def equal_up_to_phase(a: np.ndarray, b: np.ndarray) -> float:
    """Max-entry distance between ``a`` and ``b`` after removing a global phase."""
    overlap = np.trace(b.conj().T @ a)
    phase = overlap / abs(overlap) if abs(overlap) > 1e-300 else 1.0
    return float(np.max(np.abs(a - phase * b)))


# ---------------------------------------------------------------------------
# gates

SQ_CLIFFORDS = {
    "I": np.eye(2, dtype=complex),
    "X": pauli_matrix("X"),
    "Y": pauli_matrix("Y"),
    "Z": pauli_matrix("Z"),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "S": np.diag([1, 1j]),
    "Sdg": np.diag([1, -1j]),
    "SX": np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]) / 2,
    "SXdg": np.array([[1 - 1j, 1 + 1j], [1 + 1j, 1 - 1j]]) / 2,
}

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


@dataclass(frozen=True)
class Gate:
    """A circuit element: hard gates carry a schedule, easy gates only a unitary."""

    name: str
    unitary: np.ndarray
    schedule: HamiltonianSchedule | None = None

    @property
    def is_hard(self) -> bool:
        return self.schedule is not None


def xx_halfpi_schedule(pulse: PulseShape | None = None, duration: float = 1.0,
                       n_steps: int = DEFAULT_STEPS, noise: Sequence[NoiseTerm] = ()) -> HamiltonianSchedule:
    """``H = Omega(t)/2 XX`` with the pulse area forced to pi/2."""
    if pulse is None:
        pulse = PulseShape.cosine(duration, np.pi / 2, n_steps)
    else:
        pulse = pulse.scaled_to_area(np.pi / 2)
    ctrl = ControlTerm(pulse, 0.5 * pauli_matrix("XX"), "xx")
    return HamiltonianSchedule(2, (ctrl,), tuple(noise))


def iswap_schedule(g: float = 1.0, n_steps: int = DEFAULT_STEPS,
                   noise: Sequence[NoiseTerm] = ()) -> HamiltonianSchedule:
    """``H = g (XX + YY)`` held for ``T = pi / (4 g)``."""
    duration = np.pi / (4 * g)
    ctrl = ControlTerm(PulseShape.constant(g, duration, n_steps), pauli_sum({"XX": 1, "YY": 1}), "g")
    return HamiltonianSchedule(2, (ctrl,), tuple(noise))


def single_qubit_gate(name: str, qubit: int = 0, n_qubits: int = 1) -> np.ndarray:
    try:
        u = SQ_CLIFFORDS[name]
    except KeyError:
        raise ValueError(f"unknown single-qubit Clifford {name!r}") from None
    return embed(u, qubit, n_qubits)


def make_gate(kind: str, **kw) -> Gate | list[Gate]:
    """Build a named gate.

    Kinds: ``xx_halfpi`` (kw: pulse, duration, n_steps, noise), ``iswap``
    (kw: g, n_steps, noise), ``single_qubit_clifford`` (kw: name, qubit,
    n_qubits) and ``cnot_composite`` (kw as for ``xx_halfpi``), which returns
    ``[H on q0, XX(pi/2), (Sdg H) x (H Sdg H)]``, equal to CNOT up to phase.
    """
    if kind == "xx_halfpi":
        sched = xx_halfpi_schedule(**kw)
        target = scipy.linalg.expm(-1j * np.pi / 4 * pauli_matrix("XX"))
        return Gate("xx_halfpi", target, sched)
    if kind == "iswap":
        sched = iswap_schedule(**kw)
        # g(XX+YY) for pi/(4g) sends |01> -> -i|10>
        target = scipy.linalg.expm(-1j * np.pi / 4 * pauli_sum({"XX": 1, "YY": 1}))
        return Gate("iswap", target, sched)
    if kind == "single_qubit_clifford":
        name = kw.get("name", "I")
        return Gate(f"{name}{kw.get('qubit', 0)}", single_qubit_gate(name, kw.get("qubit", 0), kw.get("n_qubits", 1)))
    if kind == "cnot_composite":
        h, sdg = SQ_CLIFFORDS["H"], SQ_CLIFFORDS["Sdg"]
        pre = Gate("H0", np.kron(h, np.eye(2)))
        post = Gate("cnot_post", np.kron(sdg @ h, h @ sdg @ h))
        return [pre, make_gate("xx_halfpi", **kw), post]
    raise ValueError(f"unknown gate kind {kind!r}")


# ---------------------------------------------------------------------------
# pulse files

def import_pulse(path) -> PulseShape:
    """Read a two-column (time, amplitude) text file; ``#`` starts a comment."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected two columns, got {len(parts)}")
        try:
            rows.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: non-numeric entry {line!r}") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    arr = np.array(rows)
    return PulseShape(arr[:, 0], arr[:, 1])


def export_pulse(pulse: PulseShape, path, comment: str = "") -> None:
    lines = [f"# {c}" for c in comment.splitlines()] if comment else []
    lines.append("# time, amplitude")
    lines += [f"{t:.17g}, {a:.17g}" for t, a in zip(pulse.times, pulse.amplitude)]
    Path(path).write_text("\n".join(lines) + "\n")
