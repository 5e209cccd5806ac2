"""High-order finite-volume solver for compressible flow on periodic/inflow boxes."""

from .core import (
    CartesianGrid,
    ConservedField,
    ConservedState,
    GasModel,
    PrimitiveState,
    StateError,
    TransportCoeffs,
)
from .integrator import SchemeConfig, StepStats, WenoParams, advance_to_time, ssp_rk3_step, stable_dt

__version__ = "0.1.0"

__all__ = [
    "CartesianGrid",
    "ConservedField",
    "ConservedState",
    "GasModel",
    "PrimitiveState",
    "SchemeConfig",
    "StateError",
    "StepStats",
    "TransportCoeffs",
    "WenoParams",
    "advance_to_time",
    "ssp_rk3_step",
    "stable_dt",
]
