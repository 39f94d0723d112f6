"""Workflows layer - orchestrate operations into experiments."""

from stellar_loc.workflows.baselines import compare_baselines
from stellar_loc.workflows.generate import generate_benchmark
from stellar_loc.workflows.matrix import cross_device_matrix
from stellar_loc.workflows.pipeline import load_models, run_pipeline, train_run
from stellar_loc.workflows.plots import emit_plots
from stellar_loc.workflows.report import write_report
from stellar_loc.workflows.sweeps import sweep_d, sweep_samples
from stellar_loc.workflows.train import train_models

__all__ = [
    "generate_benchmark",
    "train_models",
    "train_run",
    "load_models",
    "run_pipeline",
    "sweep_d",
    "sweep_samples",
    "compare_baselines",
    "cross_device_matrix",
    "write_report",
    "emit_plots",
]
