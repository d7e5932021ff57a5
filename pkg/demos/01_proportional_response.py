"""Proportional Response on a small quasi-linear Fisher market.

Runs the dynamics from a random start, shows the objective falling as
fast as the O(1/t) mirror-descent bound allows, and checks the limit
against the market-equilibrium conditions.
"""

import numpy as np

from marketdyn import Economy, MdConfig, SpendingState, check_equilibrium, kl_divergence, run_pr
from marketdyn.prqlin import random_start

rng = np.random.default_rng(7)
econ = Economy.from_valuations(rng.uniform(0.1, 10, (4, 3)), rng.uniform(0.5, 2, 4))
b0 = random_start(econ, rng)

traj = run_pr(econ, b0, MdConfig(tol=1e-10))
print(f"stopped: {traj.message}")

F = traj["F"]
kl = kl_divergence(traj.final.ravel(), b0.ravel())
print("\n   t        F(b^t) - F*       KL / t")
for t in (1, 2, 5, 10, 50, 100):
    if t < len(F):
        print(f"{t:4d}   {F[t] - F[-1]:14.3e}   {kl / t:10.3e}")

state = SpendingState.from_spending(econ, traj.final)
print("\nequilibrium spending:\n", np.round(state.b, 6))
print("prices:", np.round(state.p, 6))
print()
print(check_equilibrium(econ, state).table())
