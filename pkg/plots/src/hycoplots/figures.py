"""Figure builders over run directories.

Three figure kinds: training-error curves, coefficient heatmaps with
sensor overlays, and solution snapshot grids. Everything is read-only
over the run directories and deterministic for identical inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .readers import SchemaError, read_dataset, read_field, read_history, run_label

FIGURE_KINDS = ("error_curves", "coeff_heatmap", "solution_grid")

CMAP = "viridis"
SENSOR_STYLE = dict(color="red", marker="o", s=12, zorder=5, linewidths=0)


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: which runs, which figure kind, where to save."""

    runs: tuple
    kind: str
    out: str
    component: str = "u"

    def __post_init__(self):
        object.__setattr__(self, "runs", tuple(str(r) for r in self.runs))
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}")
        if not self.runs:
            raise SchemaError("no run directories given")
        missing = [r for r in self.runs if not Path(r).is_dir()]
        if missing:
            raise SchemaError("missing run directories: " + ", ".join(missing))


def _labels(runs):
    # method names from summary.json; de-duplicated so legends stay distinct
    labels = [run_label(r) for r in runs]
    seen = {}
    out = []
    for lab in labels:
        seen[lab] = seen.get(lab, 0) + 1
        out.append(lab if seen[lab] == 1 else f"{lab}#{seen[lab]}")
    return out


def plot_error_curves(spec):
    """Stacked e_d / e_s / e_p panels, one line per run.

    Returns a dict with the output path and, per run label, the final
    plotted value of each metric (read back from the drawn lines).
    """
    labels = _labels(spec.runs)
    histories = [read_history(Path(r) / "history.csv") for r in spec.runs]

    panels = ("e_d", "e_s", "e_p")
    fig, axes = plt.subplots(3, 1, figsize=(7.0, 8.4), sharex=True)
    for ax, metric in zip(axes, panels):
        for lab, cols in zip(labels, histories):
            vals = cols.get(metric)
            if vals is None or not np.any(np.isfinite(vals)):
                if metric == "e_p":
                    ax.plot([], [], " ", label=f"{lab} (no physical params)")
                continue
            mask = np.isfinite(vals)
            ax.semilogy(cols["epoch"][mask], vals[mask], label=lab)
        ax.set_ylabel(metric)
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(loc="upper right", fontsize=8)
    axes[0].set_title("error evolution during training")
    axes[-1].set_xlabel("epoch")

    # read the finals back off the figure rather than trusting the inputs
    finals = {lab: {} for lab in labels}
    for ax, metric in zip(axes, panels):
        for line in ax.get_lines():
            lab = line.get_label()
            y = np.asarray(line.get_ydata(), dtype=float)
            if lab.startswith("_") or lab not in finals or y.size == 0:
                continue
            finite = y[np.isfinite(y)]
            if finite.size:
                finals[lab][metric] = float(finite[-1])

    fig.tight_layout()
    _save(fig, spec.out)
    return {"path": str(spec.out), "panels": len(panels), "finals": finals}


def plot_coeff_heatmap(spec):
    """Per-run coefficient heatmaps plus ground truth in the last column.

    Sensor locations from the first run's dataset.csv are overlaid in red
    on every panel. Runs without coefficient fields (no fields/kappa.csv,
    e.g. reaction systems with scalar parameters) are rejected.
    """
    labels = _labels(spec.runs)
    missing = [
        str(Path(r) / "fields" / "kappa.csv")
        for r in spec.runs
        if not (Path(r) / "fields" / "kappa.csv").is_file()
    ]
    if missing:
        raise SchemaError(
            "no coefficient field for this scenario kind; missing: " + ", ".join(missing)
        )

    fields = [read_field(Path(r) / "fields" / "kappa.csv") for r in spec.runs]
    xs, ys, truth = read_field(Path(spec.runs[0]) / "fields" / "kappa_true.csv")
    coeffs = [name for name in ("kappa", "eta") if name in truth]

    sensors = None
    ds_path = Path(spec.runs[0]) / "dataset.csv"
    if ds_path.is_file():
        pts, _ = read_dataset(ds_path)
        sensors = pts[:, :2]

    ncols = len(spec.runs) + 1
    fig, axes = plt.subplots(
        len(coeffs), ncols, figsize=(3.0 * ncols, 2.8 * len(coeffs)), squeeze=False
    )
    extent = (xs[0], xs[-1], ys[0], ys[-1])
    for i, name in enumerate(coeffs):
        grids = [f[2][name] for f in fields] + [truth[name]]
        vmin = min(np.nanmin(g) for g in grids)
        vmax = max(np.nanmax(g) for g in grids)
        for j, (grid, title) in enumerate(zip(grids, labels + ["truth"])):
            ax = axes[i][j]
            im = ax.imshow(
                grid.T,
                origin="lower",
                extent=extent,
                cmap=CMAP,
                vmin=vmin,
                vmax=vmax,
                interpolation="nearest",
            )
            if sensors is not None:
                ax.scatter(sensors[:, 0], sensors[:, 1], **SENSOR_STYLE)
            if i == 0:
                ax.set_title(title, fontsize=10)
            if j == 0:
                ax.set_ylabel(name)
            ax.set_xticks([])
            ax.set_yticks([])
        fig.colorbar(im, ax=axes[i], shrink=0.85)

    _save(fig, spec.out)
    return {
        "path": str(spec.out),
        "columns": labels + ["truth"],
        "rows": coeffs,
        "sensors": sensors,
    }


def plot_solution_grid(spec):
    """Runs as rows, snapshot times as columns, one field component.

    Static runs contribute a single fields/solution.csv panel; dynamic
    runs one panel per fields/solution_t*.csv. The predicted field
    (``<component>_phy``, else ``<component>_syn``, else the stored
    truth) is shown with a color scale shared across each row.
    """
    labels = _labels(spec.runs)
    rows = []
    for r in spec.runs:
        fdir = Path(r) / "fields"
        static = fdir / "solution.csv"
        snaps = sorted(fdir.glob("solution_t*.csv"), key=lambda p: int(p.stem.split("_t")[1]))
        if static.is_file():
            rows.append([static])
        elif snaps:
            rows.append(snaps)
        else:
            raise SchemaError(f"missing snapshots: no solution CSVs under {fdir}")

    ncols = max(len(r) for r in rows)
    fig, axes = plt.subplots(
        len(rows), ncols, figsize=(2.8 * ncols, 2.6 * len(rows)), squeeze=False
    )
    times = []
    for i, (lab, paths) in enumerate(zip(labels, rows)):
        pick = None
        row_imgs = []
        for path in paths:
            xs, ys, cols = read_field(path)
            for cand in (f"{spec.component}_phy", f"{spec.component}_syn", f"{spec.component}_true"):
                if cand in cols:
                    pick = cand if pick is None else pick
                    break
            if pick is None or pick not in cols:
                raise SchemaError(f"{path} has no {spec.component} component column")
            row_imgs.append((xs, ys, cols[pick], cols.get("t")))
        vmin = min(np.nanmin(g) for _, _, g, _ in row_imgs)
        vmax = max(np.nanmax(g) for _, _, g, _ in row_imgs)
        for j in range(ncols):
            ax = axes[i][j]
            if j >= len(row_imgs):
                ax.axis("off")
                continue
            xs, ys, grid, t = row_imgs[j]
            ax.imshow(
                grid.T,
                origin="lower",
                extent=(xs[0], xs[-1], ys[0], ys[-1]),
                cmap=CMAP,
                vmin=vmin,
                vmax=vmax,
                interpolation="nearest",
            )
            if isinstance(t, float):
                ax.set_title(f"t = {t:g}", fontsize=9)
                if i == 0:
                    times.append(t)
            ax.set_xticks([])
            ax.set_yticks([])
        axes[i][0].set_ylabel(f"{lab}\n{pick}", fontsize=9)

    _save(fig, spec.out)
    return {
        "path": str(spec.out),
        "rows": labels,
        "ncols": ncols,
        "component": spec.component,
        "times": times or None,
    }


def render(spec):
    """Dispatch on spec.kind."""
    fn = {
        "error_curves": plot_error_curves,
        "coeff_heatmap": plot_coeff_heatmap,
        "solution_grid": plot_solution_grid,
    }[spec.kind]
    return fn(spec)


def _save(fig, out):
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    # fixed metadata and dpi so identical inputs give identical bytes
    fig.savefig(out, dpi=120, metadata={"Software": "plots"})
    plt.close(fig)
