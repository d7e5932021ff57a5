"""Gradient Ascent in a Cournot duopoly with isoelastic demand.

Small step sizes converge to the Nash output 1/4.  Past eta = 3/4 the
symmetric map has an invariant interval and a period-3 point, hence
Li-Yorke chaos.
"""

import numpy as np

from marketdyn import GaMapParams, certify_li_yorke, ga_map

for eta in (0.3, 0.7, 0.8, 0.95):
    params = GaMapParams(n=2, alpha=1.0, eta=eta)
    x = 0.4
    orbit = []
    for t in range(300):
        x = ga_map(params, x)
        orbit.append(x)
    tail = np.array(orbit[-50:])
    cert = certify_li_yorke(params)
    print(f"eta={eta:<5} last 50 steps in [{tail.min():.4f}, {tail.max():.4f}]  certificate: {cert.status}")
    if cert.certified:
        L, U = cert.interval
        print(f"          invariant interval [{L:.6f}, {U:.6f}], period-3 point {cert.period3_point:.9f}")
