"""Finite-difference forward solvers for the four benchmark problems.

Static problems use a conservative 5-point discretization of
-div(kappa grad u) + eta^2 u = f with zero Dirichlet data, solved either by a
batched matrix-free Jacobi-preconditioned conjugate gradient (positive
definite coefficient fields) or by a direct sparse factorization (sign-
changing fields, where CG is not applicable).  Dynamic problems integrate in
time with classical RK4 (heat) or forward Euler (reaction-diffusion).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .coefficients import (
    DarcyParams,
    GrayScottParams,
    HeatParams,
    HelmholtzParams,
    darcy_kappa,
    grayscott_initial,
    heat_initial,
    heat_kappa,
    helmholtz_coeffs,
    helmholtz_forcing,
)
from .grid import (
    Domain2D,
    GridField2D,
    SpaceTimeField,
    sample_space,
    sample_space_batch,
    sample_spacetime,
    sample_spacetime_batch,
)


class SolverFailure(RuntimeError):
    """Linear solve did not reach tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DivergenceError(RuntimeError):
    """Time integration blew past the amplitude guard."""


@dataclass(frozen=True)
class SolverConfig:
    """Resolution and tolerances for one forward problem.

    nt is the number of time steps (0 for static problems); trajectories store
    nt + 1 frames.
    """

    domain: Domain2D
    nt: int = 0
    t_end: float = 0.0
    linear_tol: float = 1e-10
    max_lin_iters: int = 20000

    def __post_init__(self):
        if self.nt < 0:
            raise ValueError("nt must be >= 0")
        if self.nt > 0 and self.t_end <= 0:
            raise ValueError("t_end must be positive for time-dependent runs")


def _face_means(kappa):
    # arithmetic face averages; kappa: (B, nx, ny)
    kxf = 0.5 * (kappa[:, :-1, :] + kappa[:, 1:, :])
    kyf = 0.5 * (kappa[:, :, :-1] + kappa[:, :, 1:])
    return kxf, kyf


def apply_static_operator(kappa, eta2, u, domain: Domain2D):
    """(-div(kappa grad) + eta^2) u on the interior, zero on the boundary.

    kappa, u: (B, nx, ny); eta2: (B, nx, ny) or None; boundary values of u are
    treated as zero regardless of content.
    """
    ihx2 = 1.0 / domain.hx**2
    ihy2 = 1.0 / domain.hy**2
    kxf, kyf = _face_means(kappa)
    uz = u.copy()
    uz[:, 0, :] = 0.0
    uz[:, -1, :] = 0.0
    uz[:, :, 0] = 0.0
    uz[:, :, -1] = 0.0
    fx = kxf * (uz[:, 1:, :] - uz[:, :-1, :])
    fy = kyf * (uz[:, :, 1:] - uz[:, :, :-1])
    out = np.zeros_like(uz)
    out[:, 1:-1, 1:-1] = -(
        (fx[:, 1:, 1:-1] - fx[:, :-1, 1:-1]) * ihx2
        + (fy[:, 1:-1, 1:] - fy[:, 1:-1, :-1]) * ihy2
    )
    if eta2 is not None:
        out[:, 1:-1, 1:-1] += eta2[:, 1:-1, 1:-1] * uz[:, 1:-1, 1:-1]
    return out


def _operator_diagonal(kappa, eta2, domain: Domain2D):
    ihx2 = 1.0 / domain.hx**2
    ihy2 = 1.0 / domain.hy**2
    kxf, kyf = _face_means(kappa)
    diag = np.zeros_like(kappa)
    diag[:, 1:-1, 1:-1] = (kxf[:, 1:, 1:-1] + kxf[:, :-1, 1:-1]) * ihx2 + (
        kyf[:, 1:-1, 1:] + kyf[:, 1:-1, :-1]
    ) * ihy2
    if eta2 is not None:
        diag[:, 1:-1, 1:-1] += eta2[:, 1:-1, 1:-1]
    diag[:, 0, :] = 1.0
    diag[:, -1, :] = 1.0
    diag[:, :, 0] = 1.0
    diag[:, :, -1] = 1.0
    return diag


def _interior_norm(r):
    return np.sqrt(np.sum(r[:, 1:-1, 1:-1] ** 2, axis=(1, 2)))


def _static_cg_batch(kappa, eta2, f, domain, tol, max_iters, x0=None):
    """Jacobi-preconditioned CG over a batch of coefficient fields.

    kappa: (B, nx, ny); f: (nx, ny) or (B, nx, ny).  Converged batch members
    are frozen while the rest keep iterating.  Returns (B, nx, ny) with an
    exactly zero boundary.
    """
    B, nx, ny = kappa.shape
    b = np.zeros((B, nx, ny))
    b[:, 1:-1, 1:-1] = (f if f.ndim == 3 else f[None])[..., 1:-1, 1:-1]
    diag = _operator_diagonal(kappa, eta2, domain)
    if np.any(diag[:, 1:-1, 1:-1] <= 0):
        raise SolverFailure("operator diagonal not positive; CG needs a definite field")

    x = np.zeros((B, nx, ny)) if x0 is None else x0.copy()
    bnorm = _interior_norm(b)
    trivial = bnorm == 0.0
    target = tol * np.where(trivial, 1.0, bnorm)
    x[trivial] = 0.0

    r = b - apply_static_operator(kappa, eta2, x, domain)
    z = r / diag
    z[:, 0, :] = 0.0
    z[:, -1, :] = 0.0
    z[:, :, 0] = 0.0
    z[:, :, -1] = 0.0
    p = z.copy()
    rz = np.sum(r[:, 1:-1, 1:-1] * z[:, 1:-1, 1:-1], axis=(1, 2))
    active = (_interior_norm(r) > target) & ~trivial
    for _ in range(max_iters):
        if not active.any():
            break
        Ap = apply_static_operator(kappa, eta2, p, domain)
        pAp = np.sum(p[:, 1:-1, 1:-1] * Ap[:, 1:-1, 1:-1], axis=(1, 2))
        if np.any(active & (pAp <= 0)):
            raise SolverFailure("CG curvature went nonpositive; field is indefinite")
        alpha = np.where(active, rz / np.where(pAp == 0, 1.0, pAp), 0.0)
        x += alpha[:, None, None] * p
        r -= alpha[:, None, None] * Ap
        z = r / diag
        rz_new = np.sum(r[:, 1:-1, 1:-1] * z[:, 1:-1, 1:-1], axis=(1, 2))
        beta = np.where(active, rz_new / np.where(rz == 0, 1.0, rz), 0.0)
        p = np.where(active[:, None, None], z + beta[:, None, None] * p, p)
        rz = np.where(active, rz_new, rz)
        active = active & (_interior_norm(r) > target)
    if active.any():
        worst = float((_interior_norm(r) / np.where(bnorm == 0, 1.0, bnorm)).max())
        raise SolverFailure(
            f"CG did not converge in {max_iters} iterations (worst rel residual {worst:.3e})",
            residual=worst,
        )
    x[:, 0, :] = 0.0
    x[:, -1, :] = 0.0
    x[:, :, 0] = 0.0
    x[:, :, -1] = 0.0
    return x


def assemble_static_matrix(kappa, eta2, domain: Domain2D):
    """Sparse CSR matrix of the interior operator, row-major over (i, j)."""
    nx, ny = domain.nx, domain.ny
    mx, my = nx - 2, ny - 2
    ihx2 = 1.0 / domain.hx**2
    ihy2 = 1.0 / domain.hy**2
    kxf, kyf = _face_means(kappa[None])
    kxf, kyf = kxf[0], kyf[0]

    rows, cols, vals = [], [], []

    def idx(i, j):
        return (i - 1) * my + (j - 1)

    for i in range(1, nx - 1):
        for j in range(1, ny - 1):
            r = idx(i, j)
            kxm = kxf[i - 1, j] * ihx2
            kxp = kxf[i, j] * ihx2
            kym = kyf[i, j - 1] * ihy2
            kyp = kyf[i, j] * ihy2
            d = kxm + kxp + kym + kyp
            if eta2 is not None:
                d += eta2[i, j]
            rows.append(r)
            cols.append(r)
            vals.append(d)
            for ii, jj, v in (
                (i - 1, j, -kxm),
                (i + 1, j, -kxp),
                (i, j - 1, -kym),
                (i, j + 1, -kyp),
            ):
                if 1 <= ii <= nx - 2 and 1 <= jj <= ny - 2:
                    rows.append(r)
                    cols.append(idx(ii, jj))
                    vals.append(v)
    A = sp.coo_matrix((vals, (rows, cols)), shape=(mx * my, mx * my)).tocsr()
    return A


def _solve_static_direct(kappa, eta2, f, domain):
    nx, ny = domain.nx, domain.ny
    A = assemble_static_matrix(kappa, eta2, domain)
    rhs = f[1:-1, 1:-1].ravel()
    sol = spla.spsolve(A, rhs)
    if not np.all(np.isfinite(sol)):
        raise SolverFailure("direct solve produced non-finite values")
    u = np.zeros((nx, ny))
    u[1:-1, 1:-1] = sol.reshape(nx - 2, ny - 2)
    return u


def solve_static(kappa, eta2, f, cfg: SolverConfig, method="cg", x0=None):
    """Solve one static problem; kappa, eta2, f are node arrays (nx, ny)."""
    if method == "direct":
        return _solve_static_direct(kappa, eta2, f, cfg.domain)
    out = _static_cg_batch(
        kappa[None],
        None if eta2 is None else eta2[None],
        f,
        cfg.domain,
        cfg.linear_tol,
        cfg.max_lin_iters,
        x0=None if x0 is None else x0[None],
    )
    return out[0]


def solve_static_batch(kappa, eta2, f, cfg: SolverConfig, method="cg", x0=None):
    if method == "direct":
        return np.stack(
            [
                _solve_static_direct(
                    kappa[b], None if eta2 is None else eta2[b], f if f.ndim == 2 else f[b], cfg.domain
                )
                for b in range(kappa.shape[0])
            ]
        )
    return _static_cg_batch(kappa, eta2, f, cfg.domain, cfg.linear_tol, cfg.max_lin_iters, x0=x0)


# ---------------------------------------------------------------------------
# benchmark-specific front ends


def _helmholtz_fields(lam: HelmholtzParams, domain: Domain2D):
    X, Y = domain.node_mesh()
    kappa, eta = helmholtz_coeffs(X, Y, lam)
    return kappa, eta**2, helmholtz_forcing(X, Y)


def solve_helmholtz(lam: HelmholtzParams, cfg: SolverConfig, x0=None) -> GridField2D:
    kappa, eta2, f = _helmholtz_fields(lam, cfg.domain)
    return GridField2D(cfg.domain, solve_static(kappa, eta2, f, cfg, x0=x0))


def solve_helmholtz_batch(lams, cfg: SolverConfig, x0=None):
    X, Y = cfg.domain.node_mesh()
    ks, e2s = [], []
    for lam in lams:
        kappa, eta = helmholtz_coeffs(X, Y, lam)
        ks.append(kappa)
        e2s.append(eta**2)
    f = helmholtz_forcing(X, Y)
    u = solve_static_batch(np.stack(ks), np.stack(e2s), f, cfg, x0=x0)
    return StaticBatch(cfg.domain, u[..., None])


def solve_darcy(lam: DarcyParams, cfg: SolverConfig) -> GridField2D:
    X, Y = cfg.domain.node_mesh()
    kappa = darcy_kappa(X, Y, lam)
    f = np.ones_like(kappa)
    # the benchmark field changes sign, so use the direct path
    return GridField2D(cfg.domain, solve_static(kappa, None, f, cfg, method="direct"))


def solve_darcy_batch(lams, cfg: SolverConfig):
    X, Y = cfg.domain.node_mesh()
    kappa = np.stack([darcy_kappa(X, Y, lam) for lam in lams])
    f = np.ones((cfg.domain.nx, cfg.domain.ny))
    u = solve_static_batch(kappa, None, f, cfg, method="direct")
    return StaticBatch(cfg.domain, u[..., None])


def simulate_heat(lam: HeatParams, cfg: SolverConfig) -> SpaceTimeField:
    batch = simulate_heat_batch([lam], cfg)
    return SpaceTimeField(cfg.domain, 0.0, cfg.t_end, batch.values[0])


def simulate_heat_batch(lams, cfg: SolverConfig):
    if cfg.nt <= 0:
        raise ValueError("heat simulation needs nt > 0")
    domain = cfg.domain
    X, Y = domain.node_mesh()
    kappa = np.stack([heat_kappa(X, Y, lam) for lam in lams])
    u0 = heat_initial(X, Y)
    dt = cfg.t_end / cfg.nt
    out = np.zeros((len(lams), cfg.nt + 1, domain.nx, domain.ny))
    status = np.zeros(len(lams), dtype=np.int64)
    kernels.heat_rk4(kappa, u0, dt, cfg.nt, domain.hx, domain.hy, out, status)
    if status.any():
        raise DivergenceError("heat integration diverged for some parameter values")
    return DynamicBatch(domain, 0.0, cfg.t_end, out[..., None])


def simulate_grayscott(params: GrayScottParams, cfg: SolverConfig) -> SpaceTimeField:
    batch = simulate_grayscott_batch([params], cfg)
    return SpaceTimeField(cfg.domain, 0.0, cfg.t_end, batch.values[0])


def simulate_grayscott_batch(params_list, cfg: SolverConfig):
    """Forward Euler on the periodic unit square.

    The stored grid has (n+1) x (n+1) nodes with the last row/column wrapping
    around, so cfg.domain must cover [0,1]^2 with nx == ny == n+1.
    """
    d = cfg.domain
    if cfg.nt <= 0:
        raise ValueError("reaction-diffusion simulation needs nt > 0")
    if (d.x_min, d.x_max, d.y_min, d.y_max) != (0.0, 1.0, 0.0, 1.0) or d.nx != d.ny:
        raise ValueError("periodic simulation expects a square grid on [0,1]^2")
    n = d.nx - 1
    h = 1.0 / n
    dt = cfg.t_end / cfg.nt
    Du = np.array([p.Du for p in params_list])
    Dv = np.array([p.Dv for p in params_list])
    F = params_list[0].F
    k = params_list[0].k
    if any((p.F, p.k) != (F, k) for p in params_list):
        raise ValueError("feed/decay rates must be shared across a batch")
    dt_max = 0.9 * h**2 / (4.0 * max(Du.max(), Dv.max()))
    if dt > dt_max:
        raise ValueError(
            f"time step {dt:.3e} exceeds the diffusion stability limit {dt_max:.3e}"
        )
    xs = np.arange(n) * h
    Xu, Yu = np.meshgrid(xs, xs, indexing="ij")
    u0, v0 = grayscott_initial(Xu, Yu)
    out = np.zeros((len(params_list), cfg.nt + 1, n + 1, n + 1, 2))
    status = np.zeros(len(params_list), dtype=np.int64)
    kernels.gs_euler(Du, Dv, F, k, u0, v0, dt, cfg.nt, h, out, status)
    if status.any():
        raise DivergenceError("reaction-diffusion integration diverged")
    return DynamicBatch(d, 0.0, cfg.t_end, out)


@dataclass(frozen=True)
class StaticBatch:
    """Batch of static solutions with shared geometry."""

    domain: Domain2D
    values: np.ndarray  # (B, nx, ny, k)

    def sample(self, x, y):
        return sample_space_batch(self.values, self.domain, x, y)

    def field(self, b) -> GridField2D:
        return GridField2D(self.domain, self.values[b])


@dataclass(frozen=True)
class DynamicBatch:
    """Batch of trajectories with shared geometry and time window."""

    domain: Domain2D
    t0: float
    t1: float
    values: np.ndarray  # (B, nt, nx, ny, k)

    def sample(self, x, y, t):
        return sample_spacetime_batch(self.values, self.domain, self.t0, self.t1, x, y, t)

    def series(self, b) -> SpaceTimeField:
        return SpaceTimeField(self.domain, self.t0, self.t1, self.values[b])


def physical_predict(kind, lam, cfg: SolverConfig, points):
    """Solve the named problem at lam and evaluate at points.

    points: (n, 2) for static kinds, (n, 3) as (x, y, t) for dynamic kinds.
    """
    points = np.asarray(points, dtype=float)
    if kind == "helmholtz":
        field = solve_helmholtz(lam, cfg)
        return sample_space(field, points[:, 0], points[:, 1])
    if kind == "darcy":
        field = solve_darcy(lam, cfg)
        return sample_space(field, points[:, 0], points[:, 1])
    if kind == "heat":
        series = simulate_heat(lam, cfg)
        return sample_spacetime(series, points[:, 0], points[:, 1], points[:, 2])
    if kind == "grayscott":
        series = simulate_grayscott(lam, cfg)
        return sample_spacetime(series, points[:, 0], points[:, 1], points[:, 2])
    raise ValueError(f"unknown problem kind: {kind!r}")
