"""
Utilities for the consensus simulator
"""

from .logger import Logger, set_level
from .config import Config
from .errors import (
    ConfigurationError,
    ContractViolation,
    InternalFault,
    LambdaConsensusError,
    ScheduleLegalityError,
    SchemaError,
)

__all__ = [
    "Logger",
    "set_level",
    "Config",
    "ConfigurationError",
    "ContractViolation",
    "InternalFault",
    "LambdaConsensusError",
    "ScheduleLegalityError",
    "SchemaError",
]
