"""Benchmark scenarios: geometry, ground truth, dataset synthesis, error
metrics, and the preset catalog.

A Scenario bundles everything the trainer needs to treat a PDE benchmark as a
black box: batched forward solves, parameter bookkeeping (scales, projection,
ground truth), ghost sampling, and solution-error references.  Observation
datasets are drawn from a high-resolution truth solve (or the closed-form
reference where one exists) and never from the training-resolution solver.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib
except ImportError:  # python < 3.11
    import tomli as tomllib

from .coefficients import (
    DarcyParams,
    GrayScottParams,
    HeatParams,
    HelmholtzParams,
    heat_kappa,
)
from .engine import ConfigError, TrainConfig
from .grid import (
    Domain2D,
    GridField2D,
    SpaceTimeField,
    sample_space,
    sample_spacetime,
)
from .solvers import (
    SolverConfig,
    simulate_grayscott_batch,
    simulate_heat_batch,
    solve_darcy_batch,
    solve_helmholtz_batch,
)

KAPPA_FLOOR = 1e-4

GROUND_TRUTH = {
    "helmholtz": HelmholtzParams(4.0, (-1.0, -1.0), 1.0, (2.0, 1.0)),
    "heat": HeatParams(3.0, (-2.0, -2.0), 2.5, (1.0, 1.0)),
    "grayscott": GrayScottParams(2e-6, 0.8e-6, 0.018, 0.051),
    "darcy": DarcyParams(
        0.5, np.array([[1.0, 2.0, 3.0], [4.0, -1.0, -2.0], [-3.0, -4.0, 5.0]])
    ),
}

STANDARD_INIT = {
    "helmholtz": np.array([2.41, 0.19, 0.42, 1.12, 0.50, 0.49]),
    "heat": np.array([1.0, -2.0, -1.1, 1.0, 1.4, -1.3]),
    "grayscott": np.array([1e-6, 0.5e-6]),
    "darcy": np.concatenate(
        [[0.098], np.array([[0.211, 0.785, 4.031], [4.877, -0.131, 0.066], [-1.031, -3.014, 0.932]]).ravel()]
    ),
}

REGIONS = {
    "omega": None,  # full domain
    "q1": (-np.pi / 2, np.pi, -np.pi / 2, np.pi),
    "q2": (0.0, np.pi, 0.0, np.pi),
}


@dataclass
class Dataset:
    """Observation records: coordinates plus measured solution values."""

    kind: str
    points: np.ndarray  # (M, 2) or (M, 3) with trailing time
    values: np.ndarray  # (M, k)
    noise: float = 0.0
    seed: int | None = None


class _SampleAdapter:
    """Uniform .sample(points) facade over the static/dynamic batch types."""

    def __init__(self, batch, dynamic):
        self.batch = batch
        self.dynamic = dynamic

    def sample(self, pts):
        pts = np.asarray(pts, dtype=float)
        if self.dynamic:
            return self.batch.sample(pts[:, 0], pts[:, 1], pts[:, 2])
        return self.batch.sample(pts[:, 0], pts[:, 1])


@dataclass
class Scenario:
    kind: str
    name: str
    domain: Domain2D
    fine_domain: Domain2D
    region: tuple | None = None  # observation window, None = full domain
    t_end: float = 0.0
    nt: int = 0
    fine_nt: int = 0
    M: int = 25
    N: int = 0  # observation time slices for "slices" sampling
    sampling: str = "static"  # static | slices | spacetime
    linear_tol: float = 1e-10
    max_lin_iters: int = 20000
    _cache: dict = field(default_factory=dict, repr=False)

    # -- parameter bookkeeping ------------------------------------------------

    @property
    def true_params(self):
        return GROUND_TRUTH[self.kind]

    @property
    def true_vector(self):
        return self.true_params.to_vector()

    @property
    def init_vector(self):
        return STANDARD_INIT[self.kind].copy()

    @property
    def param_names(self):
        return type(self.true_params).names

    @property
    def param_scales(self):
        if self.kind == "grayscott":
            # diffusivities live at the 1e-6 scale; optimize in those units
            return np.array([1e-6, 1e-6])
        return np.ones(len(self.param_names))

    def params_from_vector(self, v):
        if self.kind == "helmholtz":
            return HelmholtzParams.from_vector(v)
        if self.kind == "heat":
            return HeatParams.from_vector(v)
        if self.kind == "grayscott":
            return self.true_params.with_vector(v)
        return DarcyParams.from_vector(v)

    def e_p(self, lam_raw):
        t = self.true_vector
        return float(np.linalg.norm(np.asarray(lam_raw) - t) / np.linalg.norm(t))

    # -- geometry -------------------------------------------------------------

    @property
    def dynamic(self):
        return self.kind in ("heat", "grayscott")

    @property
    def input_dim(self):
        return 3 if self.dynamic else 2

    @property
    def output_dim(self):
        return 2 if self.kind == "grayscott" else 1

    @property
    def input_bounds(self):
        d = self.domain
        bounds = [(d.x_min, d.x_max), (d.y_min, d.y_max)]
        if self.dynamic:
            bounds.append((0.0, self.t_end))
        return bounds

    def obs_window(self):
        if self.region is None:
            d = self.domain
            return (d.x_min, d.x_max, d.y_min, d.y_max)
        return self.region

    def solver_config(self, fine=False):
        if fine:
            return SolverConfig(
                self.fine_domain, self.fine_nt, self.t_end, self.linear_tol, self.max_lin_iters
            )
        return SolverConfig(self.domain, self.nt, self.t_end, self.linear_tol, self.max_lin_iters)

    # -- forward solves -------------------------------------------------------

    def _solve_many(self, lams, cfg):
        params = [self.params_from_vector(v) for v in np.asarray(lams, dtype=float)]
        if self.kind == "helmholtz":
            return solve_helmholtz_batch(params, cfg)
        if self.kind == "darcy":
            return solve_darcy_batch(params, cfg)
        if self.kind == "heat":
            return simulate_heat_batch(params, cfg)
        return simulate_grayscott_batch(params, cfg)

    def solve_batch(self, lams):
        return _SampleAdapter(self._solve_many(lams, self.solver_config()), self.dynamic)

    def solve_fine(self, lam_raw):
        batch = self._solve_many(np.asarray(lam_raw)[None], self.solver_config(fine=True))
        return batch.values[0]

    def truth(self):
        """Cached truth-resolution reference values.

        Helmholtz uses the closed-form reference; the other benchmarks use a
        fine solve at the true parameters.  Shape (nx, ny, k) for static
        kinds, (nt+1, nx, ny, k) for dynamic ones.
        """
        if "truth" not in self._cache:
            if self.kind == "helmholtz":
                X, Y = self.fine_domain.node_mesh()
                self._cache["truth"] = (np.sin(X) * np.sin(Y))[..., None]
            else:
                self._cache["truth"] = self.solve_fine(self.true_vector)
        return self._cache["truth"]

    # -- ghost and observation sampling --------------------------------------

    def sample_ghosts(self, rng, H):
        d = self.domain
        x = rng.uniform(d.x_min, d.x_max, size=H)
        y = rng.uniform(d.y_min, d.y_max, size=H)
        if not self.dynamic:
            return np.stack([x, y], axis=1)
        t = rng.uniform(0.0, self.t_end, size=H)
        return np.stack([x, y, t], axis=1)

    # -- projection into solvable parameter ranges ----------------------------

    def project(self, raw):
        raw = np.asarray(raw, dtype=float).copy()
        if self.kind == "grayscott":
            cfg = self.solver_config()
            n = cfg.domain.nx - 1
            h = 1.0 / n
            dt = cfg.t_end / cfg.nt
            dmax = 0.9 * h**2 / (4.0 * dt) * 0.999
            return np.clip(raw, 1e-12, dmax)
        if self.kind == "helmholtz":
            # keep kappa = bump + 1 above the floor; only a deep negative
            # amplitude can violate it
            lo = -(1.0 - KAPPA_FLOOR) / self._max_gauss(raw[1], raw[2])
            raw[0] = max(raw[0], lo)
            return raw
        if self.kind == "heat":
            return self._project_heat(raw)
        return raw  # sign-changing fields are legitimate for the direct path

    def _max_gauss(self, cx, cy):
        d = self.domain
        dx = max(d.x_min - cx, 0.0, cx - d.x_max)
        dy = max(d.y_min - cy, 0.0, cy - d.y_max)
        return float(np.exp(-(dx**2) - dy**2))

    def _project_heat(self, raw):
        if "probe" not in self._cache:
            X, Y = self.fine_domain.node_mesh()
            self._cache["probe"] = (X.ravel(), Y.ravel())
        X, Y = self._cache["probe"]

        def min_kappa(scale_neg):
            v = raw.copy()
            for i in (0, 3):
                if v[i] < 0:
                    v[i] *= scale_neg
            return heat_kappa(X, Y, HeatParams.from_vector(v)).min()

        if min_kappa(1.0) >= KAPPA_FLOOR:
            return raw
        lo, hi = 0.0, 1.0  # scale on the negative amplitudes
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if min_kappa(mid) >= KAPPA_FLOOR:
                lo = mid
            else:
                hi = mid
        out = raw.copy()
        for i in (0, 3):
            if out[i] < 0:
                out[i] *= lo
        return out

    # -- error metrics --------------------------------------------------------

    def _frame_stride(self):
        return max(1, self.fine_nt // 300)

    def _quick_points(self):
        """Strided truth-grid subset used for the per-epoch error estimate."""
        if "quick" in self._cache:
            return self._cache["quick"]
        fd = self.fine_domain
        truth = self.truth()
        xs = fd.xs()[1:-1:4]
        ys = fd.ys()[1:-1:4]
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        if not self.dynamic:
            pts = np.stack([X.ravel(), Y.ravel()], axis=1)
            ix = np.arange(1, fd.nx - 1, 4)
            iy = np.arange(1, fd.ny - 1, 4)
            ref = truth[np.ix_(ix, iy)].reshape(-1, truth.shape[-1])
        else:
            frame_ids = np.unique(np.linspace(1, self.fine_nt, 8).round().astype(int))
            times = frame_ids * (self.t_end / self.fine_nt)
            nb = X.size
            pts = np.concatenate(
                [
                    np.column_stack([X.ravel(), Y.ravel(), np.full(nb, t)])
                    for t in times
                ]
            )
            ix = np.arange(1, fd.nx - 1, 4)
            iy = np.arange(1, fd.ny - 1, 4)
            ref = np.concatenate(
                [truth[f][np.ix_(ix, iy)].reshape(-1, truth.shape[-1]) for f in frame_ids]
            )
        self._cache["quick"] = (pts, ref, float(np.linalg.norm(ref)))
        return self._cache["quick"]

    def quick_solution_error(self, solution):
        pts, ref, ref_norm = self._quick_points()
        got = solution.sample(pts)[0]
        return float(np.linalg.norm(got - ref) / ref_norm)

    def quick_syn_error(self, predict):
        pts, ref, ref_norm = self._quick_points()
        got = predict(pts)
        return float(np.linalg.norm(got - ref) / ref_norm)

    def final_solution_error(self, lam_raw):
        """Relative L2 error of a truth-resolution solve at lam against the
        reference, over the full grid (dynamic: a strided frame subset)."""
        truth = self.truth()
        model = self.solve_fine(lam_raw)
        if self.dynamic:
            s = self._frame_stride()
            truth = truth[::s]
            model = model[::s]
        return float(np.linalg.norm(model - truth) / np.linalg.norm(truth))

    def final_syn_error(self, predict):
        truth = self.truth()
        fd = self.fine_domain
        X, Y = fd.node_mesh()
        if not self.dynamic:
            pts = np.stack([X.ravel(), Y.ravel()], axis=1)
            got = predict(pts).reshape(truth.shape)
            return float(np.linalg.norm(got - truth) / np.linalg.norm(truth))
        s = self._frame_stride()
        frames = np.arange(0, self.fine_nt + 1, s)
        times = frames * (self.t_end / self.fine_nt)
        errs_sq = 0.0
        norm_sq = 0.0
        base = np.stack([X.ravel(), Y.ravel()], axis=1)
        for f, t in zip(frames, times):
            pts = np.column_stack([base, np.full(len(base), t)])
            got = predict(pts).reshape(truth.shape[1:])
            errs_sq += float(np.sum((got - truth[f]) ** 2))
            norm_sq += float(np.sum(truth[f] ** 2))
        return float(np.sqrt(errs_sq / norm_sq))


def generate_dataset(scenario: Scenario, seed=0) -> Dataset:
    """Draw observation records from the truth solution.

    static: M points uniform in the observation window.
    slices: N equispaced times T/N..T, M fresh points per slice.
    spacetime: M points uniform over window x (0, T].
    """
    rng = np.random.default_rng([seed, 11])
    x0, x1, y0, y1 = scenario.obs_window()
    truth = scenario.truth()
    fd = scenario.fine_domain

    def truth_at(pts):
        if scenario.kind == "helmholtz":
            return (np.sin(pts[:, 0]) * np.sin(pts[:, 1]))[:, None]
        if not scenario.dynamic:
            f = GridField2D(fd, truth)
            return sample_space(f, pts[:, 0], pts[:, 1])
        series = SpaceTimeField(fd, 0.0, scenario.t_end, truth)
        return sample_spacetime(series, pts[:, 0], pts[:, 1], pts[:, 2])

    if scenario.sampling == "static":
        pts = np.stack(
            [rng.uniform(x0, x1, scenario.M), rng.uniform(y0, y1, scenario.M)], axis=1
        )
    elif scenario.sampling == "slices":
        times = np.arange(1, scenario.N + 1) * (scenario.t_end / scenario.N)
        chunks = []
        for t in times:
            x = rng.uniform(x0, x1, scenario.M)
            y = rng.uniform(y0, y1, scenario.M)
            chunks.append(np.column_stack([x, y, np.full(scenario.M, t)]))
        pts = np.concatenate(chunks)
    elif scenario.sampling == "spacetime":
        pts = np.column_stack(
            [
                rng.uniform(x0, x1, scenario.M),
                rng.uniform(y0, y1, scenario.M),
                rng.uniform(0.0, scenario.t_end, scenario.M),
            ]
        )
    else:
        raise ConfigError(f"unknown sampling mode {scenario.sampling!r}")
    return Dataset(scenario.kind, pts, truth_at(pts), noise=0.0, seed=seed)


def apply_noise(dataset: Dataset, gamma, seed=0) -> Dataset:
    """Multiplicative one-sided noise: each scalar becomes u * (1 + eps) with
    eps ~ U(0, gamma) drawn independently."""
    if gamma < 0:
        raise ConfigError("noise level must be nonnegative")
    if gamma == 0:
        return Dataset(dataset.kind, dataset.points, dataset.values, 0.0, dataset.seed)
    rng = np.random.default_rng([seed, 7])
    eps = rng.uniform(0.0, gamma, size=dataset.values.shape)
    return Dataset(dataset.kind, dataset.points, dataset.values * (1.0 + eps), gamma, dataset.seed)


def compute_metrics(predict_fn, lam_raw, scenario: Scenario, dataset: Dataset) -> dict:
    """e_d on the dataset, full-resolution e_s, and e_p when lam is known."""
    out = {}
    pred = predict_fn(dataset.points)
    d = pred - dataset.values
    out["e_d"] = float(np.mean(np.sum(d * d, axis=-1)))
    if lam_raw is not None:
        out["e_p"] = scenario.e_p(lam_raw)
        out["e_s"] = scenario.final_solution_error(lam_raw)
    else:
        out["e_p"] = None
        out["e_s"] = scenario.final_syn_error(predict_fn)
    return out


# ---------------------------------------------------------------------------
# preset catalog


def _domain_for(kind, n):
    if kind == "grayscott":
        return Domain2D(0.0, 1.0, 0.0, 1.0, n + 1, n + 1)
    return Domain2D(-np.pi, np.pi, -np.pi, np.pi, n, n)


# helmholtz, heat, and darcy already run at desk scale, so their _desk names
# resolve to the standard files
PRESET_ALIASES = {
    "helmholtz_desk": "helmholtz_paper",
    "heat_desk": "heat_paper",
    "darcy_desk": "darcy_paper",
}


def _read_preset_file(name):
    name = PRESET_ALIASES.get(name, name)
    root = importlib.resources.files("hyco") / "presets" / f"{name}.toml"
    if not root.is_file():
        raise ConfigError(f"unknown preset {name!r}")
    return tomllib.loads(root.read_text())


def preset(name):
    """Load a named preset: returns (scenario, train_config, meta).

    meta carries dataset seed and noise settings plus anything else the run
    pipeline needs that is not a scenario or trainer knob.
    """
    doc = _read_preset_file(name)
    return build_preset(doc, name)


def build_preset(doc, name="custom"):
    try:
        kind = doc["kind"]
        sc = doc.get("scenario", {})
        if kind not in GROUND_TRUTH:
            raise ConfigError(f"unknown problem kind {kind!r}")
        region_key = sc.get("region", "omega")
        if region_key not in REGIONS:
            raise ConfigError(f"unknown region {region_key!r}")
        if kind in ("grayscott", "darcy") and region_key != "omega":
            raise ConfigError(f"{kind} observations always cover the full domain")
        scenario = Scenario(
            kind=kind,
            name=name,
            domain=_domain_for(kind, int(sc.get("n", 18))),
            fine_domain=_domain_for(kind, int(sc.get("fine_n", 64))),
            region=REGIONS[region_key],
            t_end=float(sc.get("t_end", 0.0)),
            nt=int(sc.get("nt", 0)),
            fine_nt=int(sc.get("fine_nt", 0)),
            M=int(sc.get("M", 25)),
            N=int(sc.get("N", 0)),
            sampling=sc.get("sampling", "static"),
        )
        tr = doc.get("train", {})
        if "hidden_layers" in tr:
            tr["hidden_layers"] = tuple(int(w) for w in tr["hidden_layers"])
        if "batch_size" in tr and tr["batch_size"] == 0:
            tr["batch_size"] = None
        unknown = set(tr) - set(TrainConfig.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown train settings: {sorted(unknown)}")
        cfg = TrainConfig(**tr).validate()
        meta = dict(doc.get("meta", {}))
        meta.setdefault("dataset_seed", 1234)
        meta.setdefault("noise_gamma", 0.0)
        meta["preset"] = name
        meta["region"] = region_key
        return scenario, cfg, meta
    except KeyError as e:
        raise ConfigError(f"preset is missing required key {e}") from e


def preset_names():
    root = importlib.resources.files("hyco") / "presets"
    return sorted(p.name[: -len(".toml")] for p in root.iterdir() if p.name.endswith(".toml"))
