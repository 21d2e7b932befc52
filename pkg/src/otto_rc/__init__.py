"""Finite-time quantum Otto engine with reaction-coordinate-mapped reservoirs."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    EngineConfig,
    Numerics,
    ReservoirTemps,
    RcParams,
    SpectralDensity,
    TlsParams,
    rc_mapping,
    thermal_state,
)
from .qops import SpaceLayout  # noqa: F401
from .engine import CycleMetrics, CycleState, Engine, run_engine  # noqa: F401
from .sweep import SweepSpec, figure_datasets, run_sweep  # noqa: F401
