"""
Analysis Layer: Trace verdicts, state graphs and exhaustive exploration
"""

from .explorer import (
    BadComponent,
    ExplorationReport,
    ObjectKind,
    SafetyViolation,
    TightnessResult,
    WitnessStatus,
    explore,
    explore_object,
    find_tightness_witness,
    sweep_if_direction,
)
from .graph import StateGraph, lasso_cycle
from .verdict import CheckResult, Status, Verdict, check_trace

__all__ = [
    "BadComponent",
    "ExplorationReport",
    "ObjectKind",
    "SafetyViolation",
    "TightnessResult",
    "WitnessStatus",
    "explore",
    "explore_object",
    "find_tightness_witness",
    "sweep_if_direction",
    "StateGraph",
    "lasso_cycle",
    "CheckResult",
    "Status",
    "Verdict",
    "check_trace",
]
