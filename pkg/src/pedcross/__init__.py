"""Pedestrians crossing a two-lane street with vehicle priority."""
from pedcross.engine import run, step, initial_state
from pedcross.scenario import ScenarioConfig, load_scenario, validate_scenario, build_geometry

__all__ = ["ScenarioConfig", "build_geometry", "initial_state", "load_scenario", "run", "step", "validate_scenario"]
