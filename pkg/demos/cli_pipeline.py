#!/usr/bin/env python3
"""The whole pipeline through the command line interface.

Runs two miniature trainings (coupled and network-only), merges them
with `hyco compare`, and, if the plotting companion package is
installed, renders the error-curve figure from the run directories.
Everything happens inside a temporary directory.
"""
import tempfile
from pathlib import Path

from hyco.cli import main as hyco

CONFIG = """
kind = "helmholtz"

[scenario]
n = 12
fine_n = 24
region = "omega"
M = 12
sampling = "static"

[train]
epochs = 60
lr_phy = 0.3
lr_syn = 2e-3
optimizer = "gd"
H = 32
hidden_layers = [16, 16]
activation = "relu"
residual = true

[meta]
dataset_seed = 7
noise_gamma = 0.0
"""

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    cfg = tmp / "mini.toml"
    cfg.write_text(CONFIG)

    runs = []
    for method in ("hyco", "nn_only"):
        out = tmp / method
        print(f"$ hyco run --config mini.toml --method {method}")
        rc = hyco(["run", "--config", str(cfg), "--method", method, "--out", str(out)])
        assert rc == 0
        runs.append(str(out))
        print()

    print("$ hyco compare", " ".join(Path(r).name for r in runs))
    rc = hyco(["compare", *runs])
    assert rc == 0

    try:
        from hycoplots.figures import FigureSpec, plot_error_curves
    except ImportError:
        print("\n(hycoplots not installed, skipping the figure)")
    else:
        fig = tmp / "curves.png"
        info = plot_error_curves(
            FigureSpec(runs=tuple(runs), kind="error_curves", out=str(fig))
        )
        print(f"\nrendered {info['panels']}-panel figure, finals: {info['finals']}")
