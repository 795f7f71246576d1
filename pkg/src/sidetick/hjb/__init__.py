"""Backward solver for the market maker's value function."""

from .grid import StateGrid, build_grid, common_period
from .model import ModelParams, intensity, running_penalty, terminal_value
from .solver import (PolicyGrid, ValueGrid, backward_step, optimal_controls,
                     policy_from_values, solve, terminal_slice)

__all__ = [
    "ModelParams", "PolicyGrid", "StateGrid", "ValueGrid", "backward_step", "build_grid",
    "common_period", "intensity", "optimal_controls", "policy_from_values", "running_penalty",
    "solve", "terminal_slice", "terminal_value",
]
