"""Vacuum-noise model of a beam splitter with a mirror behind one input port."""

from .config import OpticalConfig, VacuumWeights, common_mode_bracket, sql_baseline, validate
from .analytic import (
    NoiseReport,
    PhotocurrentReport,
    find_extrema,
    photocurrent_variance_mirror,
    photocurrent_variance_open,
    scan_variance,
    variance,
    variance_e1,
    variance_e2,
)

__all__ = [
    "OpticalConfig",
    "VacuumWeights",
    "common_mode_bracket",
    "sql_baseline",
    "validate",
    "NoiseReport",
    "PhotocurrentReport",
    "find_extrema",
    "photocurrent_variance_mirror",
    "photocurrent_variance_open",
    "scan_variance",
    "variance",
    "variance_e1",
    "variance_e2",
]
__version__ = "0.1.0"
