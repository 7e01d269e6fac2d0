"""Error curves of a few single-qubit drives and their first-order error vectors.

A constant 2 pi turn closes its curve (no first-order dephasing error), a
cosine pulse of the same area does not, and an optimized pulse does.
"""
import numpy as np

from noisegeo.geometry import error_curves, first_order_error
from noisegeo.optimize import optimize_first_order_pulse
from noisegeo.pauli import pauli_matrix
from noisegeo.schedule import ControlTerm, HamiltonianSchedule, NoiseTerm, PulseShape


def report(name, pulse):
    s = HamiltonianSchedule(1, (ControlTerm(pulse, 0.5 * pauli_matrix("X")),), (NoiseTerm({"Z": 1.0}),))
    c = error_curves(s)[0]
    r = first_order_error(c, 1.0)
    print(f"{name:>22}: R1 = {np.array2string(r, precision=3)}  |R1|/T = {np.linalg.norm(r) / c.duration:.3e}")


if __name__ == "__main__":
    report("constant 2pi", PulseShape.constant(2 * np.pi, 1.0))
    report("cosine 2pi", PulseShape.cosine(1.0, 2 * np.pi))
    report("constant pi", PulseShape.constant(np.pi, 1.0))
    report("optimized pi", optimize_first_order_pulse("x_pi", ("Z",)).pulse)
