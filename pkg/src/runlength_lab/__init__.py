"""Numerical laboratory for run-length statistics of intermittent maps."""

__version__ = "0.1.0"

from .errors import ConvergenceError, SolverError, SubCellWarning
from .map_core import (
    Alpha,
    OrbitSample,
    PreimageLadder,
    apply_map,
    derivative,
    inverse_left,
    inverse_right,
    orbit_array,
    orbit_stream,
    preimage_sequence,
    symbol,
)
