"""Geometric description of coherent and stochastic gate noise in few-qubit circuits.

Error curves in the toggling frame, front-propagated error trajectories under
Pauli twirling, and Pauli-transfer-matrix reconstruction of tailored channels.
"""
from .pauli import PauliString, pauli_labels, error_axes, pauli_matrix
from .schedule import (PulseShape, ControlTerm, NoiseTerm, HamiltonianSchedule, Gate, make_gate,
                       propagate_noiseless, propagate_noisy, import_pulse, export_pulse)
from .spectra import QuasiStatic, OrnsteinUhlenbeck, White, Tabulated, synthesize, second_moment
from .geometry import ErrorCurve, MagnusOrders, error_curves, first_order_error, magnus_orders, error_unitary
from .channel import exact_ptm, twirled_ptm, analytic_twirled_diagonal, average_gate_fidelity, ptm_diagnostics
from .circuit import Circuit, HardLayer, EasyLayer, propagate_error_front, simulate_exact
from .twirl import TwirlAssignment, sample_twirls, apply_twirls, enumerate_twirl_average
from .metrics import state_fidelity, rc_average_fidelity, bare_fidelity, ScalingSeries, fit_scaling_exponent

__version__ = "0.1.0"
