"""Scenario files, execution, export and the command line interface."""
from .config import expand_sweep, load_config, load_schema, validate
from .export import dumps, export_results, format_float
from .runner import ArrayOutput, RunResult, SweepResult, run_scenario, sweep

__all__ = ["ArrayOutput", "RunResult", "SweepResult", "dumps", "expand_sweep",
           "export_results", "format_float", "load_config", "load_schema", "run_scenario",
           "sweep", "validate"]
