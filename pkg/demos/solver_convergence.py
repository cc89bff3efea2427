#!/usr/bin/env python3
"""Order-of-accuracy study for the built-in PDE solvers.

Solves the static Helmholtz problem with a manufactured solution on a
sequence of halved grids and prints the error ratios (4 means clean
second order), then checks the heat stepper against the analytic
single-mode decay u(t) = e^{-2 kappa t} sin(x) sin(y).

Run it directly; it finishes in a few seconds.
"""
import numpy as np

from hyco import kernels
from hyco.coefficients import HelmholtzParams
from hyco.grid import Domain2D
from hyco.solvers import SolverConfig, solve_helmholtz

params = HelmholtzParams(alpha1=4.0, c1=(-1.0, -1.0), alpha2=1.0, c2=(2.0, 1.0))

print("Helmholtz, manufactured solution u = sin(x) sin(y)")
print(f"{'n':>5} {'L2 error':>12} {'ratio':>7}")
prev = None
for n in (17, 33, 65):
    dom = Domain2D(-np.pi, np.pi, -np.pi, np.pi, n, n)
    cfg = SolverConfig(domain=dom)
    sol = solve_helmholtz(params, cfg)
    X, Y = dom.node_mesh()
    err = np.sqrt(np.mean((sol.values[..., 0] - np.sin(X) * np.sin(Y)) ** 2))
    ratio = "" if prev is None else f"{prev / err:7.2f}"
    print(f"{n:>5} {err:12.3e} {ratio:>7}")
    prev = err

print()
print("Heat, single mode on [0, pi]^2 with kappa = 1")
n, t_end, nt = 65, 0.1, 400
dom = Domain2D(0.0, np.pi, 0.0, np.pi, n, n)
X, Y = dom.node_mesh()
u0 = np.sin(X) * np.sin(Y)
kappa = np.ones((1, n, n))
out = np.zeros((1, nt + 1, n, n))
status = np.zeros(1, dtype=np.int64)
kernels.heat_rk4(kappa, u0, t_end / nt, nt, dom.hx, dom.hy, out, status)
final = out[0, -1]
exact = np.exp(-2.0 * t_end) * np.sin(X) * np.sin(Y)
rel = np.linalg.norm(final - exact) / np.linalg.norm(exact)
print(f"relative error vs e^(-2t) decay after t={t_end}: {rel:.2e}")
