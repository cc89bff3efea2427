"""Comparison methods: physics-only fitting, data-only network training, and
a PINN whose PDE residual is built from central differences of network
evaluations.

The physics-only baseline is the co-training engine with the synthetic player
switched off, so the two share every numerical detail by construction.  The
network-only baseline and the PINN have their own small loops.

The PINN differentiates the network by second-order central differences at
stencil offsets instead of analytic second derivatives.  That keeps the
package free of a higher-order autodiff engine while preserving the method's
structure: data mismatch plus a weighted mean-square PDE residual, trained
jointly over network weights and physical parameters.  The physical-parameter
learning rate reuses lr_phy.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from .coefficients import (
    darcy_kappa,
    grayscott_initial,
    heat_initial,
    heat_kappa,
    helmholtz_coeffs,
    helmholtz_forcing,
)
from .engine import (
    ConfigError,
    SyntheticModel,
    TrainConfig,
    TrainResult,
    input_normalization,
    physical_grad_fd,
    stopping_check,
    train_hyco,
)
from .nn import AdamState, MlpArch, adam_step, mlp_backward, mlp_init


def fit_physics_only(scenario, dataset, cfg: TrainConfig) -> TrainResult:
    """Adam on the data loss of the physical model alone.

    Runs the shared engine with the synthetic player disabled; the data-side
    weight is forced on if the incoming config has beta = 0.
    """
    beta = cfg.beta if cfg.beta > 0 else 1.0
    run_cfg = replace(cfg, syn_player=False, phy_player=True, beta=beta)
    return train_hyco(scenario, dataset, run_cfg, method="physics_only")


def train_nn_only(dataset, arch: MlpArch, cfg: TrainConfig, scenario=None) -> TrainResult:
    """Adam on the observation mean-square error alone.

    scenario is optional and only used for input normalization and the
    solution-error log column; without it inputs are normalized from the
    dataset extents.
    """
    cfg.validate()
    t_start = time.perf_counter()
    if scenario is not None:
        shift, scale = input_normalization(scenario, cfg)
    else:
        lo = dataset.points.min(axis=0)
        hi = dataset.points.max(axis=0)
        shift = 0.5 * (lo + hi)
        scale = np.where(hi > lo, 0.5 * (hi - lo), 1.0)
    syn = SyntheticModel(arch, mlp_init(arch, [cfg.seed, 1]), shift, scale)
    adam = AdamState.for_params(syn.params)
    history = []
    timings = {"physical_s": 0.0, "synthetic_s": 0.0, "logging_s": 0.0}
    for epoch in range(1, cfg.epochs + 1):
        t0 = time.perf_counter()
        pts, vals = dataset.points, dataset.values
        if cfg.batch_size is not None and cfg.batch_size < len(pts):
            rng = np.random.default_rng([cfg.seed, 4, epoch])
            pick = rng.choice(len(pts), size=cfg.batch_size, replace=False)
            pts, vals = pts[pick], vals[pick]
        pred = syn.predict(pts)
        G = 2.0 * cfg.alpha * (pred - vals) / len(pts)
        grads = mlp_backward(syn.params, syn.arch, syn.normalize(pts), G)
        syn.params = adam_step(syn.params, grads, adam, cfg.lr_syn)
        timings["synthetic_s"] += time.perf_counter() - t0

        t0 = time.perf_counter()
        d = syn.predict(dataset.points) - dataset.values
        l_syn = float(np.mean(np.sum(d * d, axis=-1)))
        row = {
            "epoch": epoch,
            "L_syn": l_syn,
            "L_phy": None,
            "L_int": None,
            "e_p": None,
            "e_d": l_syn,
            "e_s": scenario.quick_syn_error(syn.predict) if scenario is not None else None,
        }
        history.append(row)
        timings["logging_s"] += time.perf_counter() - t0
    timings["total_s"] = time.perf_counter() - t_start
    return TrainResult(
        method="nn_only",
        history=history,
        lam=None,
        syn=syn,
        stop_epoch=None,
        epochs_run=cfg.epochs,
        timings=timings,
        config=cfg,
        final={},
    )


# ---------------------------------------------------------------------------
# PINN


@dataclass
class CollocationSet:
    """Residual and boundary/initial collocation points.

    interior has shape (n_i, d); boundary (n_b, d) with target values
    (n_b, k).  h_res is the spatial stencil spacing of the residual
    differencing, h_t the temporal one (0 for static problems).
    """

    interior: np.ndarray
    boundary: np.ndarray
    boundary_values: np.ndarray
    h_res: float
    h_t: float = 0.0

    def __post_init__(self):
        self.interior = np.asarray(self.interior, dtype=float)
        self.boundary = np.asarray(self.boundary, dtype=float)
        self.boundary_values = np.asarray(self.boundary_values, dtype=float)
        if len(self.interior) < 1 or len(self.boundary) < 1:
            raise ConfigError("collocation sets need at least one point each")
        if self.h_res <= 0:
            raise ConfigError("h_res must be positive")


def make_collocation(scenario, n_interior, n_boundary, seed=0, h_res=None) -> CollocationSet:
    """Draw collocation points for a scenario.

    Interior points keep a stencil-width margin from the domain edges (and
    from t = 0 and t = T for time-dependent problems).  Boundary points carry
    the known solution values there: homogeneous Dirichlet walls for the
    static problems, walls plus the initial state for heat, the initial state
    alone for the periodic reaction-diffusion problem.
    """
    rng = np.random.default_rng([seed, 21])
    d = scenario.domain
    width = d.x_max - d.x_min
    h = width * 1e-3 if h_res is None else h_res
    xlo, xhi = d.x_min + h, d.x_max - h
    ylo, yhi = d.y_min + h, d.y_max - h

    if not scenario.dynamic:
        interior = np.stack(
            [rng.uniform(xlo, xhi, n_interior), rng.uniform(ylo, yhi, n_interior)], axis=1
        )
        boundary = _wall_points(rng, d, n_boundary)
        bvals = np.zeros((n_boundary, 1))
        return CollocationSet(interior, boundary, bvals, h)

    T = scenario.t_end
    ht = T * 1e-3
    interior = np.stack(
        [
            rng.uniform(xlo, xhi, n_interior),
            rng.uniform(ylo, yhi, n_interior),
            rng.uniform(ht, T - ht, n_interior),
        ],
        axis=1,
    )
    if scenario.kind == "heat":
        n_wall = n_boundary // 2
        n_init = n_boundary - n_wall
        walls = _wall_points(rng, d, n_wall)
        walls = np.column_stack([walls, rng.uniform(0.0, T, n_wall)])
        x0 = rng.uniform(d.x_min, d.x_max, n_init)
        y0 = rng.uniform(d.y_min, d.y_max, n_init)
        init = np.column_stack([x0, y0, np.zeros(n_init)])
        bvals = np.concatenate(
            [np.zeros((n_wall, 1)), heat_initial(x0, y0)[:, None]]
        )
        return CollocationSet(np.asarray(interior), np.concatenate([walls, init]), bvals, h, ht)

    # periodic square: no walls, initial state only
    x0 = rng.uniform(d.x_min, d.x_max, n_boundary)
    y0 = rng.uniform(d.y_min, d.y_max, n_boundary)
    init = np.column_stack([x0, y0, np.zeros(n_boundary)])
    u0, v0 = grayscott_initial(x0, y0)
    return CollocationSet(interior, init, np.stack([u0, v0], axis=1), h, ht)


def _wall_points(rng, d, n):
    side = rng.integers(0, 4, n)
    along = rng.uniform(0.0, 1.0, n)
    x = np.where(
        side < 2,
        np.where(side == 0, d.x_min, d.x_max),
        d.x_min + along * (d.x_max - d.x_min),
    )
    y = np.where(
        side < 2,
        d.y_min + along * (d.y_max - d.y_min),
        np.where(side == 2, d.y_min, d.y_max),
    )
    return np.stack([x, y], axis=1)


def _stencil_offsets(scenario, colloc):
    h = colloc.h_res
    offs = [
        np.zeros(scenario.input_dim),
    ]
    for axis, step in ((0, h), (1, h)):
        for sign in (+1.0, -1.0):
            e = np.zeros(scenario.input_dim)
            e[axis] = sign * step
            offs.append(e)
    if scenario.dynamic:
        for sign in (+1.0, -1.0):
            e = np.zeros(scenario.input_dim)
            e[2] = sign * colloc.h_t
            offs.append(e)
    return np.stack(offs)  # (S, d) in order c, +x, -x, +y, -y[, +t, -t]


def stencil_points(scenario, colloc):
    """All residual evaluation points, flattened to (n_i * S, d)."""
    offs = _stencil_offsets(scenario, colloc)
    pts = colloc.interior[:, None, :] + offs[None, :, :]
    return pts.reshape(-1, scenario.input_dim), offs.shape[0]


def _interior_residual(E, lam_raw, colloc, scenario, with_jacobian=False):
    """PDE residual from cached network evaluations E of shape (n, S, k).

    Returns r of shape (n, k_r); with_jacobian additionally returns
    dE of shape (n, S, k_r, k) holding d r[:, a] / d E[:, s, b].
    """
    n, S, k = E.shape
    h = colloc.h_res
    P = colloc.interior
    params = scenario.params_from_vector(lam_raw)
    c, xp, xm, yp, ym = E[:, 0], E[:, 1], E[:, 2], E[:, 3], E[:, 4]

    if scenario.kind == "grayscott":
        tp, tm = E[:, 5], E[:, 6]
        Du, Dv = params.Du, params.Dv
        F, krate = params.F, params.k
        u, v = c[:, 0], c[:, 1]
        lap = (xp + xm + yp + ym - 4.0 * c) / h**2
        ut = (tp - tm)[:, 0] / (2.0 * colloc.h_t)
        vt = (tp - tm)[:, 1] / (2.0 * colloc.h_t)
        r = np.stack(
            [
                ut - Du * lap[:, 0] + u * v * v - F * (1.0 - u),
                vt - Dv * lap[:, 1] - u * v * v + (F + krate) * v,
            ],
            axis=1,
        )
        if not with_jacobian:
            return r
        dE = np.zeros((n, S, 2, 2))
        dE[:, 0, 0, 0] = 4.0 * Du / h**2 + v * v + F
        dE[:, 0, 0, 1] = 2.0 * u * v
        dE[:, 0, 1, 0] = -v * v
        dE[:, 0, 1, 1] = 4.0 * Dv / h**2 - 2.0 * u * v + F + krate
        for s in (1, 2, 3, 4):
            dE[:, s, 0, 0] = -Du / h**2
            dE[:, s, 1, 1] = -Dv / h**2
        dE[:, 5, 0, 0] = dE[:, 5, 1, 1] = 1.0 / (2.0 * colloc.h_t)
        dE[:, 6, 0, 0] = dE[:, 6, 1, 1] = -1.0 / (2.0 * colloc.h_t)
        return r, dE

    # scalar problems share the conservative flux stencil
    x, y = P[:, 0], P[:, 1]
    if scenario.kind == "helmholtz":
        kf = lambda xx, yy: helmholtz_coeffs(xx, yy, params)[0]
        eta2 = helmholtz_coeffs(x, y, params)[1] ** 2
        rhs = helmholtz_forcing(x, y)
    elif scenario.kind == "darcy":
        kf = lambda xx, yy: darcy_kappa(xx, yy, params)
        eta2 = np.zeros(n)
        rhs = np.ones(n)
    elif scenario.kind == "heat":
        kf = lambda xx, yy: heat_kappa(xx, yy, params)
        eta2 = np.zeros(n)
        rhs = np.zeros(n)
    else:
        raise ConfigError(f"no residual defined for kind {scenario.kind!r}")

    kxp = kf(x + 0.5 * h, y)
    kxm = kf(x - 0.5 * h, y)
    kyp = kf(x, y + 0.5 * h)
    kym = kf(x, y - 0.5 * h)
    u = c[:, 0]
    flux = -(
        kxp * (xp[:, 0] - u)
        - kxm * (u - xm[:, 0])
        + kyp * (yp[:, 0] - u)
        - kym * (u - ym[:, 0])
    ) / h**2
    r = flux + eta2 * u - rhs
    if scenario.kind == "heat":
        r = r + (E[:, 5, 0] - E[:, 6, 0]) / (2.0 * colloc.h_t)
    r = r[:, None]
    if not with_jacobian:
        return r
    dE = np.zeros((n, S, 1, 1))
    dE[:, 0, 0, 0] = (kxp + kxm + kyp + kym) / h**2 + eta2
    dE[:, 1, 0, 0] = -kxp / h**2
    dE[:, 2, 0, 0] = -kxm / h**2
    dE[:, 3, 0, 0] = -kyp / h**2
    dE[:, 4, 0, 0] = -kym / h**2
    if scenario.kind == "heat":
        dE[:, 5, 0, 0] = 1.0 / (2.0 * colloc.h_t)
        dE[:, 6, 0, 0] = -1.0 / (2.0 * colloc.h_t)
    return r, dE


def pinn_residual(syn, lam_raw, colloc: CollocationSet, scenario) -> float:
    """Mean-square PDE residual plus boundary mismatch of a network.

    syn only needs a predict(points) method; derivatives are taken by central
    differences at the stencil offsets.
    """
    pts, S = stencil_points(scenario, colloc)
    E = syn.predict(pts).reshape(len(colloc.interior), S, -1)
    r = _interior_residual(E, np.asarray(lam_raw, dtype=float), colloc, scenario)
    term = float(np.mean(np.sum(r * r, axis=-1)))
    b = syn.predict(colloc.boundary) - colloc.boundary_values
    term += float(np.mean(np.sum(b * b, axis=-1)))
    return term


def train_pinn(scenario, dataset, arch: MlpArch, colloc: CollocationSet, cfg: TrainConfig) -> TrainResult:
    """Joint Adam on network weights and physical parameters.

    Loss: alpha * data MSE + gamma * (residual + boundary mismatch).  The
    network gradient flows through the stencil evaluations exactly; the
    physical parameters get central-difference gradients through the residual
    with the network evaluations held fixed.
    """
    cfg.validate()
    if arch.activation != "tanh":
        raise ConfigError("the residual differencing assumes a smooth (tanh) network")
    t_start = time.perf_counter()
    shift, scale = input_normalization(scenario, cfg)
    syn = SyntheticModel(arch, mlp_init(arch, [cfg.seed, 1]), shift, scale)
    adam_syn = AdamState.for_params(syn.params)
    scales = scenario.param_scales
    lam_scaled = scenario.init_vector / scales
    adam_lam = AdamState.for_params([lam_scaled])

    pts_st, S = stencil_points(scenario, colloc)
    n_i = len(colloc.interior)
    n_b = len(colloc.boundary)
    obs_pts, obs_vals = dataset.points, dataset.values

    history = []
    lam_history = []
    timings = {"physical_s": 0.0, "synthetic_s": 0.0, "logging_s": 0.0}
    stop_epoch = None
    epochs_run = 0
    epochs = cfg.epochs if cfg.pinn_epochs is None else cfg.pinn_epochs
    for epoch in range(1, epochs + 1):
        lam_raw = lam_scaled * scales

        t0 = time.perf_counter()
        E = syn.predict(pts_st).reshape(n_i, S, -1)
        blocks_x = []
        blocks_g = []
        if cfg.alpha > 0:
            pred_obs = syn.predict(obs_pts)
            blocks_x.append(obs_pts)
            blocks_g.append(2.0 * cfg.alpha * (pred_obs - obs_vals) / len(obs_pts))
        if cfg.gamma > 0:
            r, dE = _interior_residual(E, lam_raw, colloc, scenario, with_jacobian=True)
            G_st = np.einsum("na,nsab->nsb", r, dE) * (2.0 * cfg.gamma / n_i)
            blocks_x.append(pts_st)
            blocks_g.append(G_st.reshape(n_i * S, -1))
            pred_b = syn.predict(colloc.boundary)
            blocks_x.append(colloc.boundary)
            blocks_g.append(2.0 * cfg.gamma * (pred_b - colloc.boundary_values) / n_b)
        if blocks_x:
            X = syn.normalize(np.concatenate(blocks_x))
            G = np.concatenate(blocks_g)
            grads = mlp_backward(syn.params, syn.arch, X, G)
            syn.params = adam_step(syn.params, grads, adam_syn, cfg.lr_syn)
        timings["synthetic_s"] += time.perf_counter() - t0

        t0 = time.perf_counter()
        if cfg.gamma > 0:

            def lam_objective(lams):
                out = np.empty(len(lams))
                for i, lv in enumerate(lams):
                    ri = _interior_residual(E, lv, colloc, scenario)
                    out[i] = cfg.gamma * float(np.mean(np.sum(ri * ri, axis=-1)))
                return out

            grad_lam = physical_grad_fd(lam_raw, lam_objective, cfg.fd_step, scales)
            [lam_scaled] = adam_step([lam_scaled], [grad_lam], adam_lam, cfg.lr_phy)
            lam_raw = scenario.project(lam_scaled * scales)
            lam_scaled = lam_raw / scales
        timings["physical_s"] += time.perf_counter() - t0

        t0 = time.perf_counter()
        d = syn.predict(obs_pts) - obs_vals
        l_syn = float(np.mean(np.sum(d * d, axis=-1)))
        row = {"epoch": epoch, "L_syn": l_syn, "L_phy": None, "L_int": None}
        row["residual"] = pinn_residual(syn, lam_raw, colloc, scenario)
        for name, val in zip(scenario.param_names, lam_raw):
            row[name] = float(val)
        row["e_p"] = scenario.e_p(lam_raw)
        row["e_d"] = l_syn
        row["e_s"] = scenario.quick_syn_error(syn.predict)
        history.append(row)
        timings["logging_s"] += time.perf_counter() - t0

        epochs_run = epoch
        lam_history.append(lam_scaled.copy())
        if cfg.stopping and cfg.gamma > 0 and stopping_check(lam_history, cfg.Z, cfg.eps_stop):
            stop_epoch = epoch
            break

    timings["total_s"] = time.perf_counter() - t_start
    return TrainResult(
        method="pinn",
        history=history,
        lam=lam_scaled * scales,
        syn=syn,
        stop_epoch=stop_epoch,
        epochs_run=epochs_run,
        timings=timings,
        config=cfg,
        final={},
    )
