"""Figure generation from run-directory CSV/JSON files.

This package reads only the documented run-directory layout (history.csv,
summary.json, dataset.csv, fields/*.csv) and never imports the training
code, so it can plot results produced anywhere.
"""

from .figures import plot_coeff_heatmap, plot_error_curves, plot_solution_grid
from .readers import read_dataset, read_field, read_history, read_summary

__all__ = [
    "plot_coeff_heatmap",
    "plot_error_curves",
    "plot_solution_grid",
    "read_dataset",
    "read_field",
    "read_history",
    "read_summary",
]
