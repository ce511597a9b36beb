"""The attenuation-feasibility frontier of a boundary-controlled plant.

Bisects the minimal certified level, then walks a ladder of levels above it
and records the achieved closed-loop gain, the feedback effort and the
margin of the Riccati certificates.  Near the frontier the solution operator
blows up and the feedback gets aggressive; well above it the synthesis
relaxes toward the quadratic regulator.
"""

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import hardyctrl as hc
import hardyctrl.weighted as weighted

OUT = os.path.join(os.path.dirname(__file__), "_artifacts")
os.makedirs(OUT, exist_ok=True)

grid = hc.build_grid("interval_1d", 120)
sys = hc.assemble_scenario(grid, hc.BOUNDARY_1D, lam=0.2, a0=1.0,
                           disturbance=(0.2, 0.8), core=(0.1, 0.3),
                           observed=(0.0, 0.5))

search = hc.bisect_gamma(sys, gamma_hi0=0.5, rel_tol=1e-3)
gstar = search.gamma_star
print(f"minimal certified level gamma* = {gstar:.5f}")
print(f"bracket {search.bracket}, {len(search.probes)} probes, "
      f"anomalies: {search.anomalies or 'none'}")

ladder = gstar * np.array([1.02, 1.05, 1.1, 1.25, 1.5, 2.0, 4.0, 8.0])
rows = []
F0 = hc.lqr_initialize(sys)
for g in ladder:
    probe = hc.feasibility_probe(sys, float(g), F0=F0)
    sol = probe.solution
    achieved = hc.hamiltonian_bisection(sys, sol.feedback, rel_tol=1e-4)
    effort = float(np.linalg.norm(weighted.output_to_euclidean(sol.feedback, sys.weights), 2))
    rows.append((g, achieved, sol.norm_P, effort))
    print(f"gamma={g:8.4f}: achieved={achieved:.5f}  |P|={sol.norm_P:9.3f}  "
          f"|F|={effort:8.3f}  slack={g - achieved:.5f}")

g_l, ach, pn, eff = map(np.array, zip(*rows))
fig, axes = plt.subplots(1, 2, figsize=(10, 4))
axes[0].plot(g_l, ach, "o-", label="achieved gain")
axes[0].plot(g_l, g_l, ":", color="gray", label="requested level")
axes[0].axvline(gstar, color="tab:red", lw=0.8, label="frontier")
axes[0].set_xlabel("attenuation level")
axes[0].set_ylabel("closed-loop gain")
axes[0].legend()
axes[1].loglog(g_l / gstar - 1.0, pn, "s-")
axes[1].set_xlabel("relative distance to the frontier")
axes[1].set_ylabel("|P| (blow-up toward the frontier)")
fig.tight_layout()
fig.savefig(os.path.join(OUT, "attenuation_frontier.svg"))
print(f"wrote {OUT}/attenuation_frontier.svg")
