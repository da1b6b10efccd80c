"""Deterministic pursuit-evasion simulation with a Monte Carlo sweep harness."""

from .config import parse_scenario, parse_sweep
from .engine import AgentSpec, EpisodeRecord, Scenario, run_episode
from .experiments import SweepSpec, fit_power_law, format_summary, run_sweep

__all__ = [
    "AgentSpec",
    "EpisodeRecord",
    "Scenario",
    "SweepSpec",
    "fit_power_law",
    "format_summary",
    "parse_scenario",
    "parse_sweep",
    "run_episode",
    "run_sweep",
]

__version__ = "0.1.0"
