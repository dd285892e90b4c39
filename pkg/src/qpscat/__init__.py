"""Quasi-periodic Helmholtz transmission solver for layered 2D gratings.

Robin-to-Robin domain decomposition with windowed (and, near Wood
frequencies, shifted) quasi-periodic Green functions.
"""

from .config import ConfigError, RunConfig, config_from_dict, load_config
from .ddm import IncidentWave, Layer, LayerStack
from .geometry import Profile, sample
from .green import (
    ForbiddenShiftError,
    GreenParams,
    WoodFrequencyError,
    mode_table,
)
from .post import (
    RayleighTable,
    SolveResult,
    energy_defect,
    evaluate_field,
    solve_stack,
)
from .specfun import WindowSpec

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ForbiddenShiftError",
    "GreenParams",
    "IncidentWave",
    "Layer",
    "LayerStack",
    "Profile",
    "RayleighTable",
    "RunConfig",
    "SolveResult",
    "WindowSpec",
    "WoodFrequencyError",
    "config_from_dict",
    "energy_defect",
    "evaluate_field",
    "load_config",
    "mode_table",
    "sample",
    "solve_stack",
    "__version__",
]
