"""Alternating co-training of a physical model and a synthetic network.

Two players share an interaction term measured at ghost points.  The physical
player minimizes beta * data_mismatch + int_weight * interaction over the PDE
coefficients via finite-difference gradients; the synthetic player minimizes
alpha * data_mismatch + int_weight * interaction over network weights via
backpropagation.  Ghost points are redrawn every epoch by default, giving a
cheap stochastic approximation of the continuous interaction integral.

The scenario object supplies problem geometry and forward solves; this module
never imports a specific benchmark.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .nn import AdamState, MlpArch, adam_step, gd_step, mlp_backward, mlp_forward, mlp_init


class ConfigError(ValueError):
    """Invalid run configuration; maps to the config-error exit code."""


@dataclass
class TrainConfig:
    """Knobs for all training modes (co-training, single players, PINN)."""

    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 100.0  # PINN residual weight, unused by the co-trainer
    int_weight: float = 1.0
    lr_phy: float = 5e-3
    lr_syn: float = 1e-3
    epochs: int = 3000
    H: int = 200
    Z: int = 200
    eps_stop: float = 5e-3
    fd_step: float = 1e-4
    seed: int = 0
    update_order: str = "gauss_seidel"
    ghost_mode: str = "per_epoch"
    optimizer: str = "adam"
    batch_size: int | None = None
    input_scaling: bool = True
    stopping: bool = True
    syn_player: bool = True
    phy_player: bool = True
    parallel: bool = False
    colloc_interior: int = 400
    colloc_boundary: int = 400
    pinn_epochs: int | None = None
    hidden_layers: tuple = (256, 256)
    activation: str = "relu"
    residual: bool = True

    def validate(self):
        if self.update_order not in ("gauss_seidel", "jacobi"):
            raise ConfigError(f"update_order must be gauss_seidel or jacobi, got {self.update_order!r}")
        if self.ghost_mode not in ("per_epoch", "fixed"):
            raise ConfigError(f"ghost_mode must be per_epoch or fixed, got {self.ghost_mode!r}")
        if self.optimizer not in ("adam", "gd"):
            raise ConfigError(f"optimizer must be adam or gd, got {self.optimizer!r}")
        if self.activation not in ("relu", "tanh"):
            raise ConfigError(f"activation must be relu or tanh, got {self.activation!r}")
        for name in ("lr_phy", "lr_syn", "fd_step", "eps_stop"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.epochs < 0:
            raise ConfigError("epochs must be nonnegative")
        for name in ("H", "Z"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        for name in ("alpha", "beta", "gamma", "int_weight"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative")
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigError("batch_size must be at least 1 when set")
        if not (self.syn_player or self.phy_player):
            raise ConfigError("at least one player must be enabled")
        return self


def _mean_record_sq(pred, target):
    d = np.asarray(pred) - np.asarray(target)
    return float(np.mean(np.sum(d * d, axis=-1)))


def loss_syn(pred, obs):
    """Mean squared mismatch of the synthetic model on the observations."""
    return _mean_record_sq(pred, obs)


def loss_phy(pred, obs):
    """Mean squared mismatch of the physical model on the observations."""
    return _mean_record_sq(pred, obs)


def loss_int(syn_at_ghosts, phy_at_ghosts):
    """Mean squared gap between the two models at the ghost points."""
    return _mean_record_sq(syn_at_ghosts, phy_at_ghosts)


@dataclass
class SyntheticModel:
    """Network plus the affine input normalization it was trained with."""

    arch: MlpArch
    params: list
    in_shift: np.ndarray
    in_scale: np.ndarray

    def normalize(self, pts):
        return (np.asarray(pts, dtype=float) - self.in_shift) / self.in_scale

    def predict(self, pts):
        return mlp_forward(self.params, self.arch, self.normalize(pts))


@dataclass
class GhostSet:
    """Unobserved comparison points shared by both players for one epoch."""

    points: np.ndarray
    mode: str


def make_ghosts(scenario, cfg: TrainConfig, epoch: int) -> GhostSet:
    if cfg.ghost_mode == "fixed":
        rng = np.random.default_rng([cfg.seed, 101, 0])
    else:
        rng = np.random.default_rng([cfg.seed, 101, epoch])
    return GhostSet(scenario.sample_ghosts(rng, cfg.H), cfg.ghost_mode)


def input_normalization(scenario, cfg: TrainConfig):
    """Spatial inputs map to [-1, 1], a trailing time input to [0, 1]."""
    bounds = scenario.input_bounds
    shift = np.zeros(len(bounds))
    scale = np.ones(len(bounds))
    if cfg.input_scaling:
        for i, (lo, hi) in enumerate(bounds):
            if i < 2:
                shift[i] = 0.5 * (lo + hi)
                scale[i] = 0.5 * (hi - lo)
            else:
                shift[i] = lo
                scale[i] = hi - lo
    return shift, scale


def physical_grad_fd(lam_raw, objective_batch, fd_step, scales=None):
    """Central-difference gradient in the scaled parameter coordinates.

    objective_batch maps an (n, p) array of raw parameter vectors to (n,)
    loss values; the step for coordinate i is fd_step * (1 + |lam_i/s_i|)
    in scaled units.  Returns the gradient with respect to scaled
    coordinates (chain rule folds the scale factor in automatically).
    """
    lam_raw = np.asarray(lam_raw, dtype=float)
    p = lam_raw.size
    scales = np.ones(p) if scales is None else np.asarray(scales, dtype=float)
    steps_scaled = fd_step * (1.0 + np.abs(lam_raw / scales))
    pert = np.zeros((2 * p, p))
    for i in range(p):
        e = np.zeros(p)
        e[i] = steps_scaled[i] * scales[i]
        pert[2 * i] = lam_raw + e
        pert[2 * i + 1] = lam_raw - e
    vals = np.asarray(objective_batch(pert), dtype=float)
    if vals.shape != (2 * p,):
        raise ValueError("objective_batch must return one value per row")
    return (vals[0::2] - vals[1::2]) / (2.0 * steps_scaled)


def stopping_check(lam_history, Z, eps) -> bool:
    """True when the newest parameter vector sits within eps of the running
    mean of the Z vectors before it."""
    if len(lam_history) < Z + 1:
        return False
    recent = np.asarray(lam_history[-(Z + 1) : -1])
    return bool(np.linalg.norm(lam_history[-1] - recent.mean(axis=0)) < eps)


@dataclass
class TrainerState:
    scenario: object
    dataset: object
    cfg: TrainConfig
    syn: SyntheticModel | None
    lam_scaled: np.ndarray | None
    adam_lam: AdamState | None
    adam_syn: AdamState | None
    solution: object  # latest physical solve (batch adapter of size 1)
    lam_history: list = field(default_factory=list)
    history: list = field(default_factory=list)
    timings: dict = field(default_factory=lambda: {"physical_s": 0.0, "synthetic_s": 0.0, "logging_s": 0.0})


def _lam_raw(st: TrainerState):
    return st.lam_scaled * st.scenario.param_scales


def _solve_single(scenario, lam_raw):
    return scenario.solve_batch(lam_raw[None])


def _lam_objective(st: TrainerState, ghost_pts, syn_at_ghosts):
    cfg = st.cfg
    obs_pts = st.dataset.points
    obs_vals = st.dataset.values

    def objective(lams):
        batch = st.scenario.solve_batch(lams)
        total = np.zeros(len(lams))
        if cfg.beta > 0:
            pred = batch.sample(obs_pts)
            d = pred - obs_vals[None]
            total += cfg.beta * np.mean(np.sum(d * d, axis=-1), axis=-1)
        if syn_at_ghosts is not None and cfg.int_weight > 0:
            gd = batch.sample(ghost_pts) - syn_at_ghosts[None]
            total += cfg.int_weight * np.mean(np.sum(gd * gd, axis=-1), axis=-1)
        return total

    return objective


def hyco_epoch(st: TrainerState, epoch: int) -> dict:
    """One alternating update; returns the epoch's log row."""
    cfg = st.cfg
    scenario = st.scenario
    ghosts = make_ghosts(scenario, cfg, epoch)
    syn_at_ghosts = None
    if st.syn is not None and cfg.int_weight > 0:
        syn_at_ghosts = st.syn.predict(ghosts.points)

    epoch_start_solution = st.solution

    # physical player
    t0 = time.perf_counter()
    if cfg.phy_player:
        objective = _lam_objective(st, ghosts.points, syn_at_ghosts)
        grad = physical_grad_fd(_lam_raw(st), objective, cfg.fd_step, scenario.param_scales)
        if cfg.optimizer == "adam":
            [st.lam_scaled] = adam_step([st.lam_scaled], [grad], st.adam_lam, cfg.lr_phy)
        else:
            [st.lam_scaled] = gd_step([st.lam_scaled], [grad], cfg.lr_phy)
        projected = scenario.project(_lam_raw(st))
        st.lam_scaled = projected / scenario.param_scales
        st.solution = _solve_single(scenario, projected)
    st.timings["physical_s"] += time.perf_counter() - t0

    # synthetic player
    t0 = time.perf_counter()
    if st.syn is not None and cfg.syn_player:
        target_solution = (
            st.solution if cfg.update_order == "gauss_seidel" else epoch_start_solution
        )
        obs_pts = st.dataset.points
        obs_vals = st.dataset.values
        if cfg.batch_size is not None and cfg.batch_size < len(obs_pts):
            rng = np.random.default_rng([cfg.seed, 4, epoch])
            pick = rng.choice(len(obs_pts), size=cfg.batch_size, replace=False)
            obs_pts = obs_pts[pick]
            obs_vals = obs_vals[pick]
        blocks_x, blocks_g = [], []
        if cfg.alpha > 0:
            pred_obs = st.syn.predict(obs_pts)
            blocks_x.append(obs_pts)
            blocks_g.append(2.0 * cfg.alpha * (pred_obs - obs_vals) / len(obs_pts))
        if cfg.int_weight > 0 and target_solution is not None:
            phy_g = target_solution.sample(ghosts.points)[0]
            pred_g = st.syn.predict(ghosts.points)
            blocks_x.append(ghosts.points)
            blocks_g.append(2.0 * cfg.int_weight * (pred_g - phy_g) / len(ghosts.points))
        if blocks_x:
            X = st.syn.normalize(np.concatenate(blocks_x))
            G = np.concatenate(blocks_g)
            grads = mlp_backward(st.syn.params, st.syn.arch, X, G)
            st.syn.params = adam_step(st.syn.params, grads, st.adam_syn, cfg.lr_syn)
    st.timings["synthetic_s"] += time.perf_counter() - t0

    # post-update logging
    t0 = time.perf_counter()
    row = {"epoch": epoch}
    obs_pts = st.dataset.points
    obs_vals = st.dataset.values
    l_syn = l_phy = l_int = None
    syn_pred = st.syn.predict(obs_pts) if st.syn is not None else None
    if syn_pred is not None:
        l_syn = loss_syn(syn_pred, obs_vals)
    if st.solution is not None:
        l_phy = loss_phy(st.solution.sample(obs_pts)[0], obs_vals)
        if st.syn is not None and cfg.int_weight > 0:
            l_int = loss_int(st.syn.predict(ghosts.points), st.solution.sample(ghosts.points)[0])
    row["L_syn"] = l_syn
    row["L_phy"] = l_phy
    row["L_int"] = l_int
    lam_raw = _lam_raw(st) if st.lam_scaled is not None else None
    if lam_raw is not None:
        for name, val in zip(scenario.param_names, lam_raw):
            row[name] = float(val)
        row["e_p"] = scenario.e_p(lam_raw)
    else:
        row["e_p"] = None
    row["e_d"] = l_syn if (st.syn is not None and cfg.syn_player) else l_phy
    if cfg.phy_player and st.solution is not None:
        row["e_s"] = scenario.quick_solution_error(st.solution)
    elif st.syn is not None:
        row["e_s"] = scenario.quick_syn_error(st.syn.predict)
    else:
        row["e_s"] = None
    st.timings["logging_s"] += time.perf_counter() - t0
    return row


def train_hyco(scenario, dataset, cfg: TrainConfig, method="hyco", init_lam=None, init_syn=None):
    """Run the alternating scheme; returns a TrainResult.

    method only labels the output; player flags in cfg decide what runs.
    """
    cfg.validate()
    t_start = time.perf_counter()
    lam0 = np.asarray(scenario.init_vector if init_lam is None else init_lam, dtype=float)
    st = TrainerState(
        scenario=scenario,
        dataset=dataset,
        cfg=cfg,
        syn=None,
        lam_scaled=None,
        adam_lam=None,
        adam_syn=None,
        solution=None,
    )
    if cfg.phy_player:
        st.lam_scaled = lam0 / scenario.param_scales
        st.adam_lam = AdamState.for_params([st.lam_scaled])
        st.solution = _solve_single(scenario, lam0)
    if cfg.syn_player:
        if init_syn is None:
            shift, scale = input_normalization(scenario, cfg)
            arch = MlpArch(
                scenario.input_dim,
                scenario.output_dim,
                tuple(cfg.hidden_layers),
                cfg.activation,
                residual=cfg.residual,
            )
            st.syn = SyntheticModel(arch, mlp_init(arch, [cfg.seed, 1]), shift, scale)
        else:
            st.syn = init_syn
        st.adam_syn = AdamState.for_params(st.syn.params)

    stop_epoch = None
    epochs_run = 0
    for epoch in range(1, cfg.epochs + 1):
        row = hyco_epoch(st, epoch)
        st.history.append(row)
        epochs_run = epoch
        if st.lam_scaled is not None:
            st.lam_history.append(st.lam_scaled.copy())
            if cfg.stopping and stopping_check(st.lam_history, cfg.Z, cfg.eps_stop):
                stop_epoch = epoch
                break

    st.timings["total_s"] = time.perf_counter() - t_start
    return TrainResult(
        method=method,
        history=st.history,
        lam=_lam_raw(st) if st.lam_scaled is not None else None,
        syn=st.syn,
        stop_epoch=stop_epoch,
        epochs_run=epochs_run,
        timings=dict(st.timings),
        config=cfg,
        final={},
    )


@dataclass
class TrainResult:
    method: str
    history: list
    lam: np.ndarray | None
    syn: SyntheticModel | None
    stop_epoch: int | None
    epochs_run: int
    timings: dict
    config: TrainConfig
    final: dict


def nash_gap(
    scenario,
    dataset,
    syn: SyntheticModel | None,
    lam_raw,
    cfg: TrainConfig,
    ghosts=None,
    n_probes=16,
    probe_step=0.05,
    seed=None,
):
    """Largest one-sided improvement either player finds among random probes
    (plus a gradient probe); near a Nash point both gaps vanish.

    Returns {"lam_gap", "syn_gap", "L1", "L2"}; gaps are clipped at zero.
    """
    rng = np.random.default_rng([cfg.seed if seed is None else seed, 3])
    if ghosts is None:
        ghosts = scenario.sample_ghosts(rng, cfg.H)
    obs_pts, obs_vals = dataset.points, dataset.values
    out = {"lam_gap": None, "syn_gap": None, "L1": None, "L2": None}

    syn_at_ghosts = syn.predict(ghosts) if syn is not None else None
    lam_raw = None if lam_raw is None else np.asarray(lam_raw, dtype=float)

    if lam_raw is not None:
        scales = scenario.param_scales

        def L1(lams):
            batch = scenario.solve_batch(lams)
            total = np.zeros(len(lams))
            if cfg.beta > 0:
                d = batch.sample(obs_pts) - obs_vals[None]
                total += cfg.beta * np.mean(np.sum(d * d, axis=-1), axis=-1)
            if syn_at_ghosts is not None and cfg.int_weight > 0:
                gd = batch.sample(ghosts) - syn_at_ghosts[None]
                total += cfg.int_weight * np.mean(np.sum(gd * gd, axis=-1), axis=-1)
            return total

        base = float(L1(lam_raw[None])[0])
        out["L1"] = base
        dirs = rng.normal(size=(n_probes, lam_raw.size))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        grad = physical_grad_fd(lam_raw, L1, cfg.fd_step, scales)
        gn = np.linalg.norm(grad)
        if gn > 0:
            dirs = np.vstack([dirs, -grad / gn])
        lam_scaled = lam_raw / scales
        probes_raw = np.stack(
            [scenario.project((lam_scaled + probe_step * d) * scales) for d in dirs]
        )
        vals = L1(probes_raw)
        out["lam_gap"] = float(max(0.0, base - vals.min()))

    if syn is not None:
        phy_g = None
        if lam_raw is not None and cfg.int_weight > 0:
            phy_g = scenario.solve_batch(lam_raw[None]).sample(ghosts)[0]

        def L2(params):
            model = SyntheticModel(syn.arch, params, syn.in_shift, syn.in_scale)
            total = 0.0
            if cfg.alpha > 0:
                total += cfg.alpha * loss_syn(model.predict(obs_pts), obs_vals)
            if phy_g is not None:
                total += cfg.int_weight * loss_int(model.predict(ghosts), phy_g)
            return total

        base = L2(syn.params)
        out["L2"] = base
        best = base
        X = syn.normalize(np.concatenate([obs_pts, ghosts]) if phy_g is not None else obs_pts)
        G_obs = 2.0 * cfg.alpha * (syn.predict(obs_pts) - obs_vals) / len(obs_pts)
        parts = [G_obs]
        if phy_g is not None:
            parts.append(2.0 * cfg.int_weight * (syn.predict(ghosts) - phy_g) / len(ghosts))
        grads = mlp_backward(syn.params, syn.arch, X, np.concatenate(parts))
        gnorm = np.sqrt(sum(float(np.sum(g * g)) for g in grads))
        pnorm = np.sqrt(sum(float(np.sum(p * p)) for p in syn.params))
        for _ in range(n_probes):
            probe = [
                p + probe_step * rng.normal(size=p.shape) * (np.linalg.norm(p) / max(1.0, np.sqrt(p.size)))
                for p in syn.params
            ]
            best = min(best, L2(probe))
        if gnorm > 0:
            step = probe_step * pnorm / gnorm
            best = min(best, L2([p - step * g for p, g in zip(syn.params, grads)]))
        out["syn_gap"] = float(max(0.0, base - best))

    return out
