"""Scenarios, the scripted demonstrator, sweeps and the command line."""

from .demo import DemoConfig, DemoResult, PolicyFailure, run_demo
from .runner import EXIT_CODES, exit_code, metrics_table, parse_angles, run_scenario, sweep
from .scenario import CONFIG_LABELS, ArmSpec, Scenario, ScenarioError, apply_params, configure, default_scenario
