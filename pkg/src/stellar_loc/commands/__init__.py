"""Commands layer - CLI facade over workflows."""

from stellar_loc.commands.evaluate import compare, evaluate, matrix
from stellar_loc.commands.generate import generate
from stellar_loc.commands.plots import plots
from stellar_loc.commands.sweep import sweep_d_cmd, sweep_samples_cmd
from stellar_loc.commands.train import train

__all__ = [
    "generate",
    "train",
    "evaluate",
    "sweep_d_cmd",
    "sweep_samples_cmd",
    "compare",
    "matrix",
    "plots",
]
