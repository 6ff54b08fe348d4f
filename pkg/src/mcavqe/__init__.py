"""Variational product-state simulation of a four-site anisotropic spin cluster."""
from .errors import ConfigurationError, InvariantError, UsageError
from .model import EnergyBreakdown, FieldSpec, ModelParams
from .solver import OptimizationResult, OptimizerConfig, optimize_ground_state, warm_start_sweep

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "InvariantError", "UsageError",
    "EnergyBreakdown", "FieldSpec", "ModelParams",
    "OptimizationResult", "OptimizerConfig", "optimize_ground_state", "warm_start_sweep",
]
