"""Synthetic classroom simulation."""

from .generate import batch_stream, generate_stream, measure_mse
from .runner import ScenarioSummary, run_scenario, run_scenario_in_process
from .scenario import (
    REGION_CENTERS,
    Episode,
    FocusRegion,
    RegionFocus,
    ScenarioScript,
    SplitFocus,
    StudentProfile,
    load_script,
    script_from_dict,
)

__all__ = [
    "REGION_CENTERS",
    "Episode",
    "FocusRegion",
    "RegionFocus",
    "ScenarioScript",
    "ScenarioSummary",
    "SplitFocus",
    "StudentProfile",
    "batch_stream",
    "generate_stream",
    "load_script",
    "measure_mse",
    "run_scenario",
    "run_scenario_in_process",
    "script_from_dict",
]
