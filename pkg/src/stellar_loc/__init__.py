"""STELLAR - re-calibration-free indoor localization from Wi-Fi fingerprints."""

__version__ = "0.1.0"
