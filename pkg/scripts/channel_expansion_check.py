"""Analytic twirled PTM diagonal against exact enumeration for one error axis."""
import mpmath
import numpy as np

from noisegeo.channel import analytic_twirled_diagonal, twirled_ptm
from noisegeo.geometry import MagnusOrders, error_unitary

if __name__ == "__main__":
    print("theta      order-2     order-3     order-4 residual")
    with mpmath.workdps(40):
        for th in np.geomspace(1e-3, 3e-2, 6):
            o = MagnusOrders.single_axis(1, {"Z": th})
            exact = np.diag(twirled_ptm(error_unitary(o, dps=40), dps=40))
            res = [max(abs(float(e - a)) for e, a in zip(exact, analytic_twirled_diagonal(o, k, dps=40).coefficients))
                   for k in (2, 3, 4)]
            print(f"{th:.3e}  " + "  ".join(f"{r:.3e}" for r in res))
