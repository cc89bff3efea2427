"""Run-directory serialization: training history, summary, dataset, and
field dumps.

Everything is plain CSV/JSON so downstream tools can consume a run without
importing this package.  Floats are written with repr so identical runs
produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .coefficients import darcy_kappa, heat_kappa, helmholtz_coeffs


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (np.floating,)):
        return repr(float(v))
    return str(v)


def write_history(path, history) -> list:
    """Write epoch rows as CSV, dropping columns that are None everywhere.

    Returns the column names written.
    """
    path = Path(path)
    if not history:
        path.write_text("epoch\n")
        return ["epoch"]
    cols = []
    for row in history:
        for key in row:
            if key not in cols:
                cols.append(key)
    keep = [c for c in cols if any(row.get(c) is not None for row in history)]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(keep)
        for row in history:
            w.writerow([_fmt(row.get(c)) for c in keep])
    return keep


def read_history(path) -> list:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for rec in reader:
            row = {}
            for key, val in rec.items():
                if val == "" or val is None:
                    row[key] = None
                elif key == "epoch":
                    row[key] = int(val)
                else:
                    row[key] = float(val)
            rows.append(row)
    return rows


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def write_summary(path, summary: dict):
    Path(path).write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")


def read_summary(path) -> dict:
    return json.loads(Path(path).read_text())


def write_dataset(run_dir, dataset, meta: dict):
    """dataset.csv holds the records; dataset.json the provenance."""
    run_dir = Path(run_dir)
    dim = dataset.points.shape[1]
    k = dataset.values.shape[1]
    cols = ["x", "y"] + (["t"] if dim == 3 else [])
    cols += ["u", "v"][:k] if k <= 2 else [f"c{i}" for i in range(k)]
    cols.append("noisy")
    flag = 1 if dataset.noise > 0 else 0
    with (run_dir / "dataset.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for pt, val in zip(dataset.points, dataset.values):
            w.writerow([_fmt(float(c)) for c in pt] + [_fmt(float(c)) for c in val] + [flag])
    side = {
        "kind": dataset.kind,
        "seed": dataset.seed,
        "noise_gamma": dataset.noise,
        "records": len(dataset.points),
        **{k2: v for k2, v in meta.items()},
    }
    write_summary(run_dir / "dataset.json", side)


def read_dataset_csv(path):
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = np.array([[float(c) for c in row] for row in reader])
    return header, rows


def _write_table(path, cols, arrays):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for row in zip(*arrays):
            w.writerow([_fmt(float(c)) for c in row])


def write_fields(run_dir, scenario, lam_final=None, syn_predict=None, n_snapshots=5):
    """Dump coefficient and solution fields on the truth-resolution grid.

    kappa.csv / kappa_true.csv: identified and true coefficient fields (kinds
    with a spatial coefficient).  solution.csv (static) or solution_t{j}.csv
    (dynamic, equispaced times including 0 and T): columns x, y, [t,] then
    u_true[, v_true], u_phy[, v_phy], u_syn[, v_syn] for available models.
    """
    out = Path(run_dir) / "fields"
    out.mkdir(parents=True, exist_ok=True)
    fd = scenario.fine_domain
    X, Y = fd.node_mesh()
    xs, ys = X.ravel(), Y.ravel()

    def coeff_columns(lam_vec):
        params = scenario.params_from_vector(lam_vec)
        if scenario.kind == "helmholtz":
            kap, eta = helmholtz_coeffs(X, Y, params)
            return ["kappa", "eta"], [kap.ravel(), eta.ravel()]
        if scenario.kind == "heat":
            return ["kappa"], [heat_kappa(X, Y, params).ravel()]
        if scenario.kind == "darcy":
            return ["kappa"], [darcy_kappa(X, Y, params).ravel()]
        return None, None

    names, true_cols = coeff_columns(scenario.true_vector)
    if names is not None:
        _write_table(out / "kappa_true.csv", ["x", "y"] + names, [xs, ys] + true_cols)
        if lam_final is not None:
            _, fit_cols = coeff_columns(lam_final)
            _write_table(out / "kappa.csv", ["x", "y"] + names, [xs, ys] + fit_cols)

    species = ["u", "v"][: scenario.output_dim]
    truth = scenario.truth()
    model = scenario.solve_fine(lam_final) if lam_final is not None else None

    def snapshot(path, frame_true, frame_phy, tval):
        cols = ["x", "y"]
        arrays = [xs, ys]
        if tval is not None:
            cols.append("t")
            arrays.append(np.full(xs.shape, tval))
        for i, sp in enumerate(species):
            cols.append(f"{sp}_true")
            arrays.append(frame_true[..., i].ravel())
        if frame_phy is not None:
            for i, sp in enumerate(species):
                cols.append(f"{sp}_phy")
                arrays.append(frame_phy[..., i].ravel())
        if syn_predict is not None:
            pts = np.stack([xs, ys], axis=1)
            if tval is not None:
                pts = np.column_stack([pts, np.full(xs.shape, tval)])
            pred = syn_predict(pts)
            for i, sp in enumerate(species):
                cols.append(f"{sp}_syn")
                arrays.append(pred[:, i])
        _write_table(path, cols, arrays)

    if not scenario.dynamic:
        snapshot(out / "solution.csv", truth, model, None)
    else:
        frames = np.linspace(0, scenario.fine_nt, n_snapshots).round().astype(int)
        for j, f in enumerate(frames):
            tval = f * (scenario.t_end / scenario.fine_nt)
            snapshot(
                out / f"solution_t{j}.csv",
                truth[f],
                model[f] if model is not None else None,
                tval,
            )


def build_summary(scenario, meta, cfg, result, dataset) -> dict:
    """Assemble the run summary: identity, resolved config, final metrics.

    The reported e_s is the last history row's value; full-resolution errors
    get their own keys so the two conventions stay distinguishable.
    """
    from dataclasses import asdict

    last = result.history[-1] if result.history else {}
    final = {
        "e_d": last.get("e_d"),
        "e_s": last.get("e_s"),
    }
    if result.lam is not None:
        final["e_p"] = scenario.e_p(result.lam)
        final["e_s_physical"] = scenario.final_solution_error(result.lam)
        final["lam"] = np.asarray(result.lam)
    if result.syn is not None:
        final["e_s_synthetic"] = scenario.final_syn_error(result.syn.predict)
    summary = {
        "method": result.method,
        "kind": scenario.kind,
        "preset": meta.get("preset"),
        "region": meta.get("region", "omega"),
        "seed": cfg.seed,
        "epochs_run": result.epochs_run,
        "stop_epoch": result.stop_epoch,
        "param_names": list(scenario.param_names),
        "lam_true": np.asarray(scenario.true_vector),
        "dataset": {
            "seed": dataset.seed,
            "noise_gamma": dataset.noise,
            "records": len(dataset.points),
        },
        "config": asdict(cfg),
        "timings": result.timings,
        "final": final,
    }
    return summary
