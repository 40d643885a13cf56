"""Three-level hierarchy over a simulated day: commitment, SMPC, deployment, plant."""

from .level3 import Level3Result, ReserveSlice, run_level3
from .levels import (DayAheadPlan, Level2Result, SolverOptions, attribute_infeasibility,
                     run_level1, run_level2_step)
from .plant import DeviceControls, PlantLog, PlantState, plant_step
from .simulate import ClosedLoopTrace, StepRecord, compute_metrics, simulate_day

__all__ = [
    "ClosedLoopTrace", "DayAheadPlan", "DeviceControls", "Level2Result", "Level3Result",
    "PlantLog", "PlantState", "ReserveSlice", "SolverOptions", "StepRecord", "attribute_infeasibility",
    "compute_metrics", "plant_step", "run_level1", "run_level2_step", "run_level3",
    "simulate_day",
]
