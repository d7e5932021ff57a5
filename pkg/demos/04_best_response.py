"""Best Response duopoly: a spiral whose stability depends only on the
cost ratio r = alpha / beta, with threshold r0 = 3 + 2 sqrt 2."""

from marketdyn import br_fixed_point, classify_stability, simulate_br

for r in (1.0, 4.0, 5.8, 6.2, 9.0):
    rep = classify_stability(r, 1.0)
    x, y = br_fixed_point(r, 1.0)
    traj = simulate_br(1.01 * x, y, r, 1.0, 200)
    d = traj["dist"]
    end = len(d) - 1
    print(f"r={r:<4} |lambda|={rep.eigen_modulus:.4f} {rep.stability:16s}"
          f" dist(0)={d[0]:.2e} dist({end})={d[end]:.2e} {traj.message}")
