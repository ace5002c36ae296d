"""
Lambda Consensus: Simulator and model checker for consensus under
lambda-constrained crash failures
"""

__version__ = "0.1.0"
__author__ = "Lambda Consensus Team"

from .objects import *
from .engine import *
from .analysis import *
from .application import *
from .utils import *

__all__ = [
    # Objects layer exports
    "BOT",
    "RegisterFile",
    "RegisterId",
    "new_register_file",
    "Tag",
    "ac_init",
    "ac_step",
    "ac_step_bound",
    "arm_init",
    "arm_step",
    # Engine layer exports
    "RunConfig",
    "CrashPolicy",
    "SystemState",
    "ScheduledAction",
    "Step",
    "Crash",
    "Trace",
    "Thread",
    "lambda_of",
    "init_system",
    "enabled_actions",
    "apply_action",
    "run_random",
    "run_schedule",
    "regime_of",
    # Analysis layer exports
    "Verdict",
    "check_trace",
    "ExplorationReport",
    "ObjectKind",
    "WitnessStatus",
    "explore",
    "explore_object",
    "find_tightness_witness",
    "sweep_if_direction",
    # Application layer exports
    "StressCampaign",
    # Utility exports
    "Config",
    "Logger",
    "ConfigurationError",
    "ScheduleLegalityError",
    "SchemaError",
]
