"""Cell-free massive MIMO joint communication and proactive monitoring.

Closed-form SE / monitoring-success-probability evaluation, greedy AP mode
assignment with baselines, and a channel-level Monte Carlo oracle.
"""

from .config import ConfigError, ExperimentSpec, SystemConfig, load_config
from .scenario import Layout, LargeScaleState, make_drop
from .grouping import GroupingState, ModeAssignment, build_groups
from .perf import PerformanceReport, evaluate
from .assignment import (
    AssignmentResult,
    brute_force_assignment,
    colocated_baseline,
    greedy_mode_assignment,
    random_mode_assignment,
)

__version__ = "0.1.0"

__all__ = [
    "AssignmentResult", "ConfigError", "ExperimentSpec", "GroupingState", "Layout",
    "LargeScaleState", "ModeAssignment", "PerformanceReport", "SystemConfig",
    "brute_force_assignment", "build_groups", "colocated_baseline", "evaluate",
    "greedy_mode_assignment", "load_config", "make_drop", "random_mode_assignment",
]
