"""Storage module - dataset CSVs, model files and plain output files."""

from stellar_loc.lib.storage import csvfile, file, modelfile

__all__ = ["csvfile", "file", "modelfile"]
