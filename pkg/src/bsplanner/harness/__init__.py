"""CLI harness: scenarios, single-shot planning, simulation, benchmarks."""

from .planner import PlanReport, plan_once
from .scenario import Scenario, load_scenario, scenario_from_dict
from .sim import SimReport, simulate
from .trajcsv import sample_trajectory, write_trajectory_csv, yaw_from_velocity

__all__ = [
    "PlanReport",
    "plan_once",
    "Scenario",
    "load_scenario",
    "scenario_from_dict",
    "SimReport",
    "simulate",
    "sample_trajectory",
    "write_trajectory_csv",
    "yaw_from_velocity",
]
