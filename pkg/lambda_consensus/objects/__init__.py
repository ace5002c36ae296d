"""
Objects Layer: Shared registers and the two building-block objects
"""

from .shared_memory import (
    BOT,
    DEC_REG,
    Access,
    RegisterFile,
    RegisterId,
    RegObject,
    new_register_file,
    value_min,
)
from .adopt_commit import AcCursor, AcRecord, Marker, Tag, ac_init, ac_step, ac_step_bound, ac_violations
from .arm_mutex import ArmCursor, ArmPhase, acquirers, arm_init, arm_step

__all__ = [
    "BOT",
    "DEC_REG",
    "Access",
    "RegisterFile",
    "RegisterId",
    "RegObject",
    "new_register_file",
    "value_min",
    "AcCursor",
    "AcRecord",
    "Marker",
    "Tag",
    "ac_init",
    "ac_step",
    "ac_step_bound",
    "ac_violations",
    "ArmCursor",
    "ArmPhase",
    "acquirers",
    "arm_init",
    "arm_step",
]
