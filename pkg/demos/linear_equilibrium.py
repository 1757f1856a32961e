"""Linear (addictive) habit: equilibrium habit curve and ratcheting consumption.

Solves the mean field equilibrium for the Figure 1 (top) parameters at each
p in the sweep and prints the habit curve Zbar^l, consumption C^l(t, 5) and
the risky fraction pi^l(t, 5) at a few dates.
"""

import numpy as np

from habitmfg import HabitSpec, TypeVector, feedback_linear, make_grid, solve_zbar_linear
from habitmfg.presets import FIGURES

fig = FIGURES["fig1_linear"]
grid = make_grid(fig["T"], 2000)
habit = HabitSpec(fig["x0"], fig["z0"], fig["delta"], fig["T"])
x = fig["x_eval"]
show = [0, 500, 1000, 1500, 2000]

for p in fig["values"]:
    o = TypeVector(fig["mu"], fig["sigma"], p)
    mfe = solve_zbar_linear(grid, o, habit)
    pi, c = feedback_linear(grid.nodes, x, mfe)
    print(f"p = {p}: K_surplus = {mfe.K_surplus:.4f}, int Zbar = {mfe.zbar.integral():.4f} < x0 = {habit.x0}")
    print("    t      Zbar     C(t,x)   pi(t,x)")
    for k in show:
        print(f"  {grid.nodes[k]:4.1f}  {mfe.zbar.values[k]:8.4f}  {c[k] * x:8.4f}  {pi[k]:7.4f}")
    C = c * x
    print(f"  C increasing: {bool(np.all(np.diff(C) > 0))}, convex: {bool(np.all(np.diff(C, 2) > 0))}\n")
