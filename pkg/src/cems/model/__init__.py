"""MILP formulation of the community scheduling problem and its schedule views."""

from .checks import check_schedule, max_residual
from .comfort import DEFAULT_CUTS, ComfortCuts, add_comfort_cuts, tangent_cuts
from .formulation import (BuiltModel, build_level1, build_level2, max_zones,
                          resolve_mode)
from .schedule import FfrCommitment, Schedule, extract_schedule
from .varmap import VarKey, VarMap

__all__ = [
    "DEFAULT_CUTS", "BuiltModel", "ComfortCuts", "FfrCommitment", "Schedule", "VarKey",
    "VarMap", "add_comfort_cuts", "build_level1", "build_level2", "check_schedule",
    "extract_schedule", "max_residual", "max_zones", "resolve_mode", "tangent_cuts",
]
