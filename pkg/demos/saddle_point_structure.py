"""The saddle-point structure of the synthesized loop.

Two checks on the game interpretation of the synthesis:

* driving the closed loop with the saddle disturbance turns it into the
  autonomous full-loop flow -- replaying the tabulated saddle signal from the
  same initial state reproduces the directly integrated full-loop trajectory
  to integrator accuracy;
* the quadratic value of the solution operator matches a finite-horizon
  saddle value computed by an entirely different route (a global two-point
  boundary-value solve of the coupled state/costate system) once the horizon
  dominates the decay time.

The second check runs on a small instance where the boundary-value system is
cheap to assemble densely in time.
"""

import numpy as np

import hardyctrl as hc
import hardyctrl.simulate as sim
import hardyctrl.weighted as weighted
from hardyctrl.riccati import closed_loops

grid = hc.build_grid("interval_1d", 120)
sys = hc.assemble_scenario(grid, hc.BOUNDARY_1D, lam=0.2, a0=1.0,
                           disturbance=(0.2, 0.8), core=(0.1, 0.3),
                           observed=(0.0, 0.5))
gamma = 0.15
sol = hc.newton_kleinman(sys, gamma)
print(f"synthesis at gamma={gamma}: residual {sol.residual_norm:.2e}")

T = 20.0 / abs(sol.abscissa_full_loop)
dt = T / 4000
mask = sys.masks["observed"].astype(float)
y0 = mask / weighted.norm(mask, sys.weights)

w_star, _ = hc.worst_case_signal(sys, sol.P, gamma, y0, sol.feedback, T, dt)
replay = hc.integrate_closed_loop(sys, sol.feedback, w_star, y0, T, dt)
full_loop, _ = closed_loops(sys, sol.P, gamma)
auto = sim.integrate_autonomous(full_loop, y0, T, dt, sys.weights)
num = np.sqrt(np.sum((replay.states - auto.states) ** 2 * sys.weights[:, None]) * dt)
den = np.sqrt(np.sum(auto.states ** 2 * sys.weights[:, None]) * dt)
print(f"saddle closure: driven loop vs autonomous full loop, rel L2 gap {num / den:.2e}")

# pointwise saddle formula
y_mid = replay.states[:, 1000]
w_mid = hc.worst_case_disturbance(sys, sol.P, gamma, y_mid)
w_tab = w_star[:, 1000]
print(f"saddle formula vs tabulated signal at t={replay.times[1000]:.3f}: "
      f"gap {np.linalg.norm(w_mid - w_tab):.2e}")

print("\nfinite-horizon value (small instance):")
import sys as _s, os
_s.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "tests"))
from _oracles import game_value_tpbvp

small_grid = hc.build_grid("interval_1d", 6)
small = hc.assemble_scenario(small_grid, hc.DISTRIBUTED, lam=0.1, a0=0.5,
                             disturbance=(0.2, 0.8), core=(0.1, 0.3),
                             observed=(0.0, 0.5), b=(0.55, 0.9))
F0 = hc.lqr_initialize(small)
base = hc.hamiltonian_bisection(small, F0, rel_tol=1e-4)
g_small = 2.0 * base
sol_small = hc.newton_kleinman(small, g_small, F0=F0)
rng = np.random.default_rng(0)
z0 = rng.standard_normal(small.n)
value = float(np.sum(small.weights * (sol_small.P @ z0) * z0))
horizon = 20.0 / abs(sol_small.abscissa_full_loop)
oracle = game_value_tpbvp(small, g_small, z0, horizon)
print(f"(P y0, y0) = {value:.8f}  vs boundary-value solve {oracle:.8f}  "
      f"rel gap {abs(value - oracle) / abs(value):.2e}")
