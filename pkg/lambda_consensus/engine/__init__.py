"""
Engine Layer: Consensus state machine, scheduler and traces
"""

from .consensus import DecisionRecord, MainPc, ProcState, Thread, ThreadState, enabled_threads, proc_init, proc_step, retire
from .runtime import (
    CrashPolicy,
    CrashPolicyKind,
    RunConfig,
    SystemState,
    apply_action,
    check_action,
    crash_allowed,
    enabled_actions,
    init_system,
    lambda_of,
    regime_of,
    replay_state,
    run_random,
    run_schedule,
    transition,
)
from .trace import Crash, ScheduledAction, Step, Trace, TraceEvent, dump_schedule, load_schedule

__all__ = [
    "DecisionRecord",
    "MainPc",
    "ProcState",
    "Thread",
    "ThreadState",
    "enabled_threads",
    "proc_init",
    "proc_step",
    "retire",
    "CrashPolicy",
    "CrashPolicyKind",
    "RunConfig",
    "SystemState",
    "apply_action",
    "check_action",
    "crash_allowed",
    "enabled_actions",
    "init_system",
    "lambda_of",
    "regime_of",
    "run_random",
    "replay_state",
    "run_schedule",
    "transition",
    "Crash",
    "ScheduledAction",
    "Step",
    "Trace",
    "TraceEvent",
    "dump_schedule",
    "load_schedule",
]
