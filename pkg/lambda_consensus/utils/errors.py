"""
Errors Module: Exception hierarchy for the consensus simulator

Property violations are reported as results (verdicts, exploration
reports), never raised. The exceptions below cover bad input and
programming faults only.
"""

from typing import Optional


class LambdaConsensusError(Exception):
    """Base class for every error raised by the package."""


class ConfigurationError(LambdaConsensusError, ValueError):
    """An invalid configuration value."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ContractViolation(LambdaConsensusError, ValueError):
    """A caller broke an operation's precondition (e.g. proposing ⊥)."""


class InternalFault(LambdaConsensusError, RuntimeError):
    """A programming error inside the simulator, never a run outcome."""


class SchemaError(LambdaConsensusError, ValueError):
    """A trace or schedule document does not match the expected schema."""


class ScheduleLegalityError(LambdaConsensusError):
    """
    An action that the failure model or the process states forbid.

    Attributes:
        rule: Short name of the violated rule ('crashed', 'disabled',
            'budget', 'lambda', 'decided', 'pid')
        position: Index of the action in the replayed schedule, if any
    """

    def __init__(self, rule: str, message: str, position: Optional[int] = None):
        self.rule = rule
        self.position = position
        where = f"action {position}: " if position is not None else ""
        super().__init__(f"{where}{message} [rule: {rule}]")
