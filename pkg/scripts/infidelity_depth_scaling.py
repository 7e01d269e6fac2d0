"""Infidelity of iSWAP chains versus depth, with and without twirling.

Coherent errors add in amplitude (infidelity ~ N^2); twirled errors add in
probability (infidelity ~ N).
"""
import numpy as np

from noisegeo.circuit import Circuit
from noisegeo.metrics import ScalingSeries, bare_fidelity, fit_scaling_exponent, rc_average_fidelity, worst_case_state
from noisegeo.schedule import NoiseTerm, make_gate

if __name__ == "__main__":
    delta = 0.002
    layer = Circuit.from_gates([make_gate("iswap", noise=(NoiseTerm({"XX": 1.0, "YY": 1.0}),))])
    psi = worst_case_state(layer)
    depths = np.arange(4, 65, 4)
    bare, rc = [], []
    print("depth  1-F_bare      1-F_RC")
    for n in depths:
        chain = layer.repeat(int(n))
        bare.append(1 - bare_fidelity(chain, [delta], psi).value)
        rc.append(1 - rc_average_fidelity(chain, [delta], psi, mode="layerwise").value)
        print(f"{n:5d}  {bare[-1]:.4e}  {rc[-1]:.4e}")
    for name, y in (("bare", bare), ("RC", rc)):
        f = fit_scaling_exponent(ScalingSeries(depths, y))
        print(f"{name} exponent {f.exponent:.3f} +- {f.ci95:.3f}")
