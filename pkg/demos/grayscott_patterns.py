#!/usr/bin/env python3
"""Forward Gray-Scott simulation: spot formation from a square seed.

Integrates the reaction-diffusion system on the unit square with
periodic boundaries and prints coarse ASCII snapshots of the
u-component as the pattern develops. No training here, just the
forward model the identification experiments invert.
"""
import numpy as np

from hyco.coefficients import GrayScottParams
from hyco.grid import Domain2D
from hyco.solvers import SolverConfig, simulate_grayscott_batch

params = GrayScottParams(Du=2e-6, Dv=0.8e-6, F=0.018, k=0.051)
n = 64
dom = Domain2D(0.0, 1.0, 0.0, 1.0, n + 1, n + 1)
cfg = SolverConfig(domain=dom, nt=3000, t_end=1200.0)

print(f"D_u={params.Du}, D_v={params.Dv}, F={params.F}, k={params.k}")
traj = simulate_grayscott_batch([params], cfg).values[0]

chars = " .:-=+*#%@"
for frac in (0.0, 0.25, 0.5, 1.0):
    frame = traj[int(frac * cfg.nt), ::4, ::4, 0]
    lo, hi = frame.min(), frame.max()
    print(f"\nt = {frac * cfg.t_end:.0f}  (u in [{lo:.3f}, {hi:.3f}])")
    span = hi - lo if hi > lo else 1.0
    for row in frame:
        idx = ((row - lo) / span * (len(chars) - 1)).astype(int)
        print("".join(chars[i] for i in idx))
