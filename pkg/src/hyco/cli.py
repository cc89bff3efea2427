"""Command-line front end: run a preset or config file, validate configs,
and merge finished runs into a comparison table.

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ImportError:
    import tomli as tomllib

from .baselines import fit_physics_only, make_collocation, train_nn_only, train_pinn
from .engine import ConfigError, TrainConfig, train_hyco
from .experiments import apply_noise, build_preset, generate_dataset, preset
from .io import build_summary, read_summary, write_dataset, write_fields, write_history, write_summary
from .nn import MlpArch
from .solvers import DivergenceError, SolverFailure

METHODS = ("hyco", "physics_only", "nn_only", "pinn")


def _load_spec(args):
    if getattr(args, "preset", None):
        scenario, cfg, meta = preset(args.preset)
    elif getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            doc = tomllib.loads(path.read_text())
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"config parse error in {path}: {e}") from e
        scenario, cfg, meta = build_preset(doc, name=path.stem)
    else:
        raise ConfigError("give either --preset or --config")

    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "epochs", None) is not None:
        overrides["epochs"] = args.epochs
    if getattr(args, "ghost_mode", None):
        overrides["ghost_mode"] = args.ghost_mode
    if getattr(args, "parallel", False):
        # parallel mode decouples the players, so updates switch to jacobi
        overrides["parallel"] = True
        overrides["update_order"] = "jacobi"
    if overrides:
        cfg = replace(cfg, **overrides)
    cfg.validate()
    return scenario, cfg, meta


def _mlp_arch(scenario, cfg, activation=None):
    return MlpArch(
        scenario.input_dim,
        scenario.output_dim,
        tuple(cfg.hidden_layers),
        activation or cfg.activation,
        residual=cfg.residual,
    )


def cmd_run(args) -> int:
    try:
        scenario, cfg, meta = _load_spec(args)
        if args.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {args.method!r}")
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1

    out = Path(args.out) if args.out else Path("runs") / f"{meta['preset']}_{args.method}_seed{cfg.seed}"
    try:
        out.mkdir(parents=True, exist_ok=True)
        dataset = generate_dataset(scenario, seed=meta["dataset_seed"])
        if meta["noise_gamma"] > 0:
            dataset = apply_noise(dataset, meta["noise_gamma"], seed=meta["dataset_seed"])

        if args.method == "hyco":
            result = train_hyco(scenario, dataset, cfg)
        elif args.method == "physics_only":
            result = fit_physics_only(scenario, dataset, cfg)
        elif args.method == "nn_only":
            result = train_nn_only(dataset, _mlp_arch(scenario, cfg), cfg, scenario=scenario)
        else:
            colloc = make_collocation(
                scenario, cfg.colloc_interior, cfg.colloc_boundary, seed=cfg.seed
            )
            result = train_pinn(scenario, dataset, _mlp_arch(scenario, cfg, "tanh"), colloc, cfg)

        write_history(out / "history.csv", result.history)
        write_dataset(out, dataset, meta)
        write_fields(
            out,
            scenario,
            lam_final=result.lam,
            syn_predict=result.syn.predict if result.syn is not None else None,
        )
        summary = build_summary(scenario, meta, result.config, result, dataset)
        write_summary(out / "summary.json", summary)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except (SolverFailure, DivergenceError, FloatingPointError) as e:
        print(f"runtime failure: {e}", file=sys.stderr)
        return 2

    final = summary["final"]
    bits = [f"method={result.method}", f"epochs={result.epochs_run}"]
    for key in ("e_p", "e_s", "e_d"):
        if final.get(key) is not None:
            bits.append(f"{key}={final[key]:.6g}")
    print(" ".join(bits))
    print(f"results in {out}")
    return 0


def _method_error(summary):
    """Headline solution error for a run: the physical model's where one was
    trained, the synthetic model's otherwise."""
    final = summary.get("final", {})
    if final.get("e_s_physical") is not None:
        return final["e_s_physical"]
    return final.get("e_s_synthetic")


def cmd_compare(args) -> int:
    rows = []
    for d in args.runs:
        path = Path(d) / "summary.json"
        if not path.is_file():
            print(f"missing run output: {path}", file=sys.stderr)
            return 2
        s = read_summary(path)
        rows.append(
            {
                "method": s["method"],
                "region": s.get("region", "omega"),
                "time_s": s["timings"]["total_s"],
                "e_p": s["final"].get("e_p"),
                "e_s": _method_error(s),
                "e_d": s["final"].get("e_d"),
            }
        )
    if len(rows) < 2:
        print("compare needs at least two runs", file=sys.stderr)
        return 1

    cols = ["method", "region", "time_s", "e_p", "e_s", "e_d"]
    lines = [",".join(cols)]
    for r in rows:
        lines.append(",".join("" if r[c] is None else (r[c] if isinstance(r[c], str) else repr(float(r[c]))) for c in cols))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)

    scored = [r for r in rows if r["e_s"] is not None]
    if scored:
        best = min(scored, key=lambda r: r["e_s"])
        print(f"best e_s: {best['method']} ({best['e_s']:.6g})")
    return 0


def cmd_validate(args) -> int:
    try:
        scenario, cfg, meta = _load_spec(args)
    except ConfigError as e:
        print(f"invalid: {e}", file=sys.stderr)
        return 1
    print(f"ok: {meta['preset']} ({scenario.kind}, region {meta['region']})")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="hyco", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def add_spec_flags(sp):
        sp.add_argument("--preset", help="named preset from the catalog")
        sp.add_argument("--config", help="path to a TOML config file")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--epochs", type=int, default=None)
        sp.add_argument("--ghost-mode", choices=("per_epoch", "fixed"), default=None)
        sp.add_argument("--parallel", action="store_true",
                        help="jacobi player updates; solver parallelism if available")

    run = sub.add_parser("run", help="train a method on a preset or config")
    add_spec_flags(run)
    run.add_argument("--method", default="hyco", choices=METHODS)
    run.add_argument("--out", help="run directory (default runs/<preset>_<method>_seed<seed>)")
    run.set_defaults(func=cmd_run)

    comp = sub.add_parser("compare", help="merge finished runs into one table")
    comp.add_argument("runs", nargs="+", help="run directories")
    comp.add_argument("--out", help="write the table here instead of stdout")
    comp.set_defaults(func=cmd_compare)

    val = sub.add_parser("validate", help="check a preset or config without running")
    add_spec_flags(val)
    val.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
