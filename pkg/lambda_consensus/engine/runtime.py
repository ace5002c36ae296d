"""
Runtime Module: System composition, scheduling and the crash adversary

A crash is legal only while the number of participating processes (those
that have accessed shared memory at least once) is at most
lambda = n - k, only while the crash budget f is not spent, and only on a
process that has not crashed or decided yet.
"""

import hashlib
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from ..objects.shared_memory import RegisterFile, encode_value, new_register_file
from ..utils.errors import ConfigurationError, InternalFault, ScheduleLegalityError
from ..utils.logger import Logger
from .consensus import DecisionRecord, ProcState, Thread, enabled_threads, proc_init, proc_step, retire
from .trace import Crash, ScheduledAction, Step, Trace, TraceEvent

logger = Logger("runtime")

MAX_SEED = 2 ** 64


class CrashPolicyKind(Enum):
    NONE = "none"
    EAGER = "eager"
    RANDOM = "random"
    LATEST = "latest"


@dataclass(frozen=True)
class CrashPolicy:
    """
    How a random run chooses crashes.

    Attributes:
        kind: none, eager, random or latest
        probability: Per-tick crash probability for the random policy
    """

    kind: CrashPolicyKind = CrashPolicyKind.NONE
    probability: float = 0.0

    @staticmethod
    def parse(text: str) -> "CrashPolicy":
        """
        Parse 'none', 'eager', 'latest' or 'random:<p>'.

        Raises:
            ConfigurationError: on an unknown policy or a probability outside [0, 1]
        """
        if isinstance(text, CrashPolicy):
            return text
        if not isinstance(text, str):
            raise ConfigurationError("crash_policy", f"expected a string, got {text!r}")
        name, _, arg = text.strip().lower().partition(":")
        if name == "random":
            try:
                p = float(arg)
            except ValueError:
                raise ConfigurationError("crash_policy", f"random needs a probability, got {text!r}") from None
            if not 0.0 <= p <= 1.0:
                raise ConfigurationError("crash_policy", f"probability must lie in [0, 1], got {p}")
            return CrashPolicy(CrashPolicyKind.RANDOM, p)
        if arg:
            raise ConfigurationError("crash_policy", f"unexpected argument in {text!r}")
        try:
            return CrashPolicy(CrashPolicyKind(name))
        except ValueError:
            raise ConfigurationError("crash_policy", f"unknown policy {text!r}") from None

    def __str__(self) -> str:
        if self.kind is CrashPolicyKind.RANDOM:
            return f"random:{self.probability:g}"
        return self.kind.value


def _check_int(name: str, value: Any, low: int, high: Optional[int] = None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigurationError(name, f"must be an integer, got {value!r}")
    if value < low or (high is not None and value > high):
        bound = f"[{low}, {high}]" if high is not None else f">= {low}"
        raise ConfigurationError(name, f"must be {bound}, got {value}")


def lambda_of(n: int, k: int) -> int:
    """
    Participation threshold lambda = n - k.

    Raises:
        ConfigurationError: unless 0 <= k <= n
    """
    _check_int("n", n, 1)
    _check_int("k", k, 0, n)
    return n - k


@dataclass(frozen=True)
class RunConfig:
    """
    Configuration of one simulated system and its scheduler.

    Attributes:
        n: Number of processes
        k: Constrained-failure bound, 0 <= k <= n
        f: Crash budget, f <= n
        inputs: Proposal of each process
        seed: Seed of the random scheduler
        max_steps: Cap on the length of a random run
        crash_policy: Crash choice of the random scheduler
        input_domain: Allowed proposals, unrestricted when None
    """

    n: int
    k: int
    f: int
    inputs: Tuple[int, ...]
    seed: int = 0
    max_steps: int = 100000
    crash_policy: CrashPolicy = CrashPolicy()
    input_domain: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        _check_int("n", self.n, 1)
        _check_int("k", self.k, 0, self.n)
        _check_int("f", self.f, 0, self.n)
        if not isinstance(self.inputs, (list, tuple)):
            raise ConfigurationError("inputs", f"must be a list of integers, got {self.inputs!r}")
        object.__setattr__(self, "inputs", tuple(self.inputs))
        if len(self.inputs) != self.n:
            raise ConfigurationError("inputs", f"expected {self.n} values, got {len(self.inputs)}")
        for value in self.inputs:
            _check_int("inputs", value, 0)
        if self.input_domain is not None:
            object.__setattr__(self, "input_domain", tuple(self.input_domain))
            outside = [v for v in self.inputs if v not in self.input_domain]
            if outside:
                raise ConfigurationError("inputs", f"values {outside} are outside the input domain")
        _check_int("seed", self.seed, 0, MAX_SEED - 1)
        _check_int("max_steps", self.max_steps, 1)
        object.__setattr__(self, "crash_policy", CrashPolicy.parse(self.crash_policy))

    @property
    def lambda_(self) -> int:
        return self.n - self.k

    def with_overrides(self, **fields) -> "RunConfig":
        return replace(self, **fields)

    def to_dict(self) -> Dict[str, Any]:
        """Trace-header form of the configuration."""
        document = {
            "n": self.n,
            "k": self.k,
            "f": self.f,
            "lambda": self.lambda_,
            "inputs": list(self.inputs),
            "seed": self.seed,
            "max_steps": self.max_steps,
            "crash_policy": str(self.crash_policy),
        }
        if self.input_domain is not None:
            document["input_domain"] = list(self.input_domain)
        return document

    @staticmethod
    def from_dict(document: Dict[str, Any]) -> "RunConfig":
        """
        Build a configuration from its dict form.

        Raises:
            ConfigurationError: on missing or invalid fields
        """
        for name in ("n", "k", "f", "inputs"):
            if document.get(name) is None:
                raise ConfigurationError(name, "missing required field")
        optional = {name: document[name] for name in ("seed", "max_steps", "crash_policy", "input_domain")
                    if document.get(name) is not None}
        cfg = RunConfig(n=document["n"], k=document["k"], f=document["f"],
                        inputs=document["inputs"], **optional)
        if "lambda" in document and document["lambda"] != cfg.lambda_:
            raise ConfigurationError("lambda", f"must equal n - k = {cfg.lambda_}, got {document['lambda']}")
        return cfg


def regime_of(cfg: RunConfig) -> str:
    """Name the failure regime: any-time (k = 0), initial-only (k = n) or constrained."""
    if cfg.k == 0:
        return "any-time"
    if cfg.k == cfg.n:
        return "initial-only"
    return "constrained"


@dataclass(frozen=True)
class SystemState:
    """
    Registers, process states and the failure bookkeeping of one instant.

    Equality and hashing ignore the decision records, whose step indices
    are history rather than state.
    """

    file: RegisterFile
    procs: Tuple[ProcState, ...]
    crashed: FrozenSet[int] = frozenset()
    participated: FrozenSet[int] = frozenset()
    crash_count: int = 0
    decisions: Tuple[DecisionRecord, ...] = field(default=(), compare=False)

    def proc(self, pid: int) -> ProcState:
        return self.procs[pid - 1]

    def undecided_correct(self) -> List[int]:
        """Non-crashed processes that have not decided."""
        return [p.pid for p in self.procs if p.pid not in self.crashed and not p.decided]

    def all_correct_decided(self) -> bool:
        return not self.undecided_correct()

    def decision_map(self) -> Dict[int, DecisionRecord]:
        return {record.pid: record for record in self.decisions}

    def decided_values(self) -> Dict[int, int]:
        """Decided value per pid, read from the process states."""
        return {p.pid: p.decision for p in self.procs if p.decided}

    def canonical_hash(self) -> str:
        """Digest of the state, stable across interpreter runs."""
        key = (self.file.n, self.file.k, self.file.cells, self.procs,
               sorted(self.crashed), sorted(self.participated), self.crash_count)
        return hashlib.blake2b(repr(key).encode("utf-8"), digest_size=16).hexdigest()


def init_system(cfg: RunConfig) -> SystemState:
    """Fresh system: every register ⊥, every process about to write INPUT."""
    procs = tuple(
        proc_init(pid, cfg.inputs[pid - 1], cfg.n, cfg.k, cfg.input_domain)
        for pid in range(1, cfg.n + 1)
    )
    return SystemState(file=new_register_file(cfg.n, cfg.k), procs=procs)


def crash_allowed(state: SystemState, cfg: RunConfig, pid: int) -> bool:
    p = state.procs[pid - 1]
    return (pid not in state.crashed and not p.decided
            and state.crash_count < cfg.f and len(state.participated) <= cfg.lambda_)


def enabled_actions(state: SystemState, cfg: RunConfig) -> List[ScheduledAction]:
    """
    Every legal action, steps first (pid-major, main before T), then crashes.
    """
    steps = []
    for p in state.procs:
        if p.pid in state.crashed:
            continue
        for thread in enabled_threads(p):
            steps.append(Step(p.pid, thread))
    crashes = [Crash(pid) for pid in range(1, cfg.n + 1) if crash_allowed(state, cfg, pid)]
    return steps + crashes


def check_action(state: SystemState, cfg: RunConfig, action: ScheduledAction,
                 position: Optional[int] = None):
    """
    Raise if an action is not legal in a state.

    Raises:
        ScheduleLegalityError: naming the violated rule
    """
    pid = action.pid
    if not 1 <= pid <= cfg.n:
        raise ScheduleLegalityError("pid", f"no process p{pid}", position)
    if pid in state.crashed:
        raise ScheduleLegalityError("crashed", f"p{pid} has crashed", position)
    p = state.procs[pid - 1]

    if action.kind == "step":
        if action.thread not in enabled_threads(p):
            raise ScheduleLegalityError("disabled", f"{action} is not enabled", position)
        return

    if p.decided:
        raise ScheduleLegalityError("decided", f"p{pid} has already decided", position)
    if state.crash_count >= cfg.f:
        raise ScheduleLegalityError("budget", f"crash budget f={cfg.f} is spent", position)
    if len(state.participated) > cfg.lambda_:
        raise ScheduleLegalityError(
            "lambda",
            f"{len(state.participated)} participating processes exceed lambda={cfg.lambda_}",
            position,
        )


def transition(state: SystemState, action: ScheduledAction, index: int = 0
               ) -> Tuple[SystemState, Tuple[Any, ...]]:
    """
    Apply an action already known to be legal.

    Returns:
        Tuple of (next state, the step's events; empty for a crash)
    """
    pid = action.pid
    if action.kind == "crash":
        procs = state.procs[:pid - 1] + (retire(state.procs[pid - 1]),) + state.procs[pid:]
        return replace(state, procs=procs, crashed=state.crashed | {pid},
                       crash_count=state.crash_count + 1), ()

    p, file, events = proc_step(state.procs[pid - 1], action.thread, state.file)
    shared = sum(1 for event in events if event.is_shared)
    if shared > 1:
        raise InternalFault(f"{action} performed {shared} shared accesses in one step")

    participated = state.participated
    if shared and pid not in participated:
        participated = participated | {pid}
    decisions = state.decisions
    for event in events:
        if event.op == "decide":
            decisions = decisions + (DecisionRecord(pid, event.value, index),)

    procs = state.procs[:pid - 1] + (p,) + state.procs[pid:]
    return replace(state, file=file, procs=procs, participated=participated, decisions=decisions), events


def _trace_event(state: SystemState, action: ScheduledAction, events, index: int) -> TraceEvent:
    parts, crashes = len(state.participated), state.crash_count
    if action.kind == "crash":
        return TraceEvent(i=index, act="crash", pid=action.pid, parts=parts, crashes=crashes)
    access = events[-1]
    return TraceEvent(
        i=index,
        act="step",
        pid=action.pid,
        thr=action.thread.value,
        op=access.op,
        reg=str(access.reg) if access.reg is not None else None,
        val=encode_value(access.value) if access.op != "local" else None,
        parts=parts,
        crashes=crashes,
    )


def apply_action(state: SystemState, action: ScheduledAction, cfg: RunConfig,
                 index: int = 0) -> Tuple[SystemState, TraceEvent]:
    """
    Check and apply one scheduled action.

    Args:
        state: Current state
        action: Action to apply
        cfg: Run configuration
        index: Trace position of the action

    Returns:
        Tuple of (next state, trace event)

    Raises:
        ScheduleLegalityError: if the action is not enabled
    """
    check_action(state, cfg, action, index)
    nxt, events = transition(state, action, index)
    return nxt, _trace_event(nxt, action, events, index)


def _finish(cfg: RunConfig, state: SystemState, events: List[TraceEvent]) -> Trace:
    return Trace(
        cfg=cfg.to_dict(),
        events=events,
        decisions={record.pid: record.value for record in state.decisions},
        complete=state.all_correct_decided(),
    )


def _choose(rng: np.random.Generator, cfg: RunConfig, state: SystemState,
            steps: Sequence[ScheduledAction], crashes: Sequence[ScheduledAction]) -> ScheduledAction:
    policy = cfg.crash_policy
    if crashes:
        if policy.kind is CrashPolicyKind.EAGER:
            return crashes[int(rng.integers(len(crashes)))]
        if policy.kind is CrashPolicyKind.RANDOM and rng.random() < policy.probability:
            return crashes[int(rng.integers(len(crashes)))]
    step = steps[int(rng.integers(len(steps)))]
    if crashes and policy.kind is CrashPolicyKind.LATEST:
        if step.pid not in state.participated and len(state.participated) + 1 > cfg.lambda_:
            return crashes[int(rng.integers(len(crashes)))]
    return step


def run_random(cfg: RunConfig) -> Trace:
    """
    Seeded random run under the configured crash policy.

    Each tick the crash policy may pick a legal crash; otherwise an enabled
    step is drawn uniformly. The run stops once every non-crashed process
    has decided (complete) or after max_steps actions (incomplete).
    """
    rng = np.random.default_rng(cfg.seed)
    state = init_system(cfg)
    events: List[TraceEvent] = []
    started = time.perf_counter()

    while not state.all_correct_decided() and len(events) < cfg.max_steps:
        actions = enabled_actions(state, cfg)
        steps = [a for a in actions if a.kind == "step"]
        crashes = [a for a in actions if a.kind == "crash"]
        if not steps:
            raise InternalFault("undecided correct process with no enabled step")
        action = _choose(rng, cfg, state, steps, crashes)
        index = len(events)
        state, step_events = transition(state, action, index)
        events.append(_trace_event(state, action, step_events, index))

    trace = _finish(cfg, state, events)
    logger.debug(f"run seed={cfg.seed} steps={len(events)} complete={trace.complete} "
                 f"crashed={sorted(state.crashed)} decisions={trace.decisions} "
                 f"({time.perf_counter() - started:.4f}s)")
    return trace


def run_schedule(cfg: RunConfig, schedule: Sequence[ScheduledAction]) -> Trace:
    """
    Replay an explicit schedule.

    Raises:
        ScheduleLegalityError: at the first illegal action, citing its
            position and the violated rule
    """
    state = init_system(cfg)
    events: List[TraceEvent] = []
    for index, action in enumerate(schedule):
        state, event = apply_action(state, action, cfg, index)
        events.append(event)
    return _finish(cfg, state, events)


def replay_state(cfg: RunConfig, schedule: Sequence[ScheduledAction]) -> SystemState:
    """State reached by a legal schedule."""
    state = init_system(cfg)
    for index, action in enumerate(schedule):
        check_action(state, cfg, action, index)
        state, _ = transition(state, action, index)
    return state
