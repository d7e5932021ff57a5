"""Smallest certifiably chaotic step size for price X^-gamma, two firms.

With two firms the own marginal revenue is X^-gamma (1 - gamma/2), so the
symmetric map has an interior fixed point only for gamma < 2.
"""

import numpy as np

from marketdyn.chaos import min_chaotic_eta

for gamma in np.arange(0.25, 2.0, 0.25):
    eta = min_chaotic_eta(float(gamma))
    print(f"gamma={gamma:4.2f}  eta_min={'none' if eta is None else f'{eta:.6f}'}")

print("\nfour firms extend the range:")
for gamma in (2.0, 3.0):
    print(f"gamma={gamma:4.2f}  eta_min={min_chaotic_eta(gamma, n=4):.6f}")
