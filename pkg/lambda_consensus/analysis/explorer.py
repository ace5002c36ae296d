"""
Explorer Module: Bounded explicit-state model checking

The explorer enumerates every state reachable under every interleaving
and every legal crash choice, checks the safety properties on each state
and edge, and checks termination on the bottom strongly connected
components of the step graph. Crash edges are adversary choices a run may
never take, so only step edges enter the component analysis.
"""

import hashlib
import itertools
import time
from collections import Counter, deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Hashable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..engine.consensus import Thread
from ..engine.runtime import RunConfig, SystemState, enabled_actions, init_system, transition
from ..engine.trace import ScheduledAction, Step
from ..objects.adopt_commit import ac_init, ac_step, ac_step_bound, ac_violations
from ..objects.arm_mutex import acquirers, arm_init, arm_step
from ..objects.shared_memory import BOT, DEC_REG, RegisterFile, encode_value, new_register_file
from ..utils.errors import ConfigurationError
from ..utils.logger import Logger
from .graph import StateGraph, lasso_cycle

logger = Logger("explorer")

DEFAULT_STATE_CAP = 5_000_000
DEFAULT_PROGRESS_EVERY = 100_000
MAX_REPORTED = 100


class ObjectKind(Enum):
    ADOPT_COMMIT = "adopt_commit"
    ARM = "arm"


class SafetyViolation(NamedTuple):
    """A safety property broken in a reachable state or on an edge."""

    property: str
    witness: str
    digest: str
    schedule: List[ScheduledAction]

    def to_json(self) -> Dict[str, Any]:
        return {
            "property": self.property,
            "witness": self.witness,
            "digest": self.digest,
            "schedule": [action.to_json() for action in self.schedule],
        }


@dataclass
class BadComponent:
    """
    A bottom component a fair run can be trapped in.

    Attributes:
        size: Number of states in the component
        undecided: Correct processes that never finish inside it
        digest: Canonical digest of the entry state
        prefix: Schedule from the initial state to the entry state
        cycle: Schedule leading from the entry state back to itself
    """

    size: int
    undecided: List[int]
    digest: str
    prefix: List[ScheduledAction]
    cycle: List[ScheduledAction]

    @property
    def schedule(self) -> List[ScheduledAction]:
        """Prefix followed by one turn of the cycle."""
        return self.prefix + self.cycle

    def to_json(self) -> Dict[str, Any]:
        return {
            "size": self.size,
            "undecided": self.undecided,
            "digest": self.digest,
            "prefix": [action.to_json() for action in self.prefix],
            "cycle": [action.to_json() for action in self.cycle],
        }


@dataclass
class ExplorationReport:
    """
    Result of one exploration.

    A report passes only when no safety violation and no bad component was
    found and the state cap was never hit.
    """

    subject: str
    states: int = 0
    transitions: int = 0
    crash_transitions: int = 0
    truncated: bool = False
    safety_violations: List[SafetyViolation] = field(default_factory=list)
    safety_violation_count: int = 0
    bad_components: List[BadComponent] = field(default_factory=list)
    bad_component_count: int = 0
    terminal_count: int = 0
    decided_values: List[Any] = field(default_factory=list)
    crash_participation: Dict[int, int] = field(default_factory=dict)
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def status(self) -> str:
        if self.safety_violation_count or self.bad_component_count:
            return "fail"
        if self.truncated:
            return "partial"
        return "pass"

    @property
    def liveness(self) -> str:
        if self.truncated:
            return "skipped"
        return "fail" if self.bad_component_count else "pass"

    @property
    def exit_code(self) -> int:
        return {"pass": 0, "fail": 1, "partial": 3}[self.status]

    def first_witness(self) -> Optional[List[ScheduledAction]]:
        """Schedule of the first safety violation, else of the first bad component."""
        if self.safety_violations:
            return self.safety_violations[0].schedule
        if self.bad_components:
            return self.bad_components[0].schedule
        return None

    def to_json(self) -> Dict[str, Any]:
        return {
            "subject": self.subject,
            "status": self.status,
            "liveness": self.liveness,
            "states": self.states,
            "transitions": self.transitions,
            "crash_transitions": self.crash_transitions,
            "truncated": self.truncated,
            "terminal_count": self.terminal_count,
            "decided_values": [encode_value(v) for v in self.decided_values],
            "crash_participation": {str(parts): count for parts, count in sorted(self.crash_participation.items())},
            "safety_violation_count": self.safety_violation_count,
            "safety_violations": [v.to_json() for v in self.safety_violations],
            "bad_component_count": self.bad_component_count,
            "bad_components": [c.to_json() for c in self.bad_components],
            "details": self.details,
        }


class _Edge(NamedTuple):
    action: ScheduledAction
    state: Hashable
    step: bool = True
    note: Optional[Tuple[str, str]] = None


@dataclass
class _Search:
    graph: StateGraph
    violations: List[SafetyViolation]
    violation_count: int
    transitions: int
    truncated: bool


def _digest(state: Hashable) -> str:
    return state.canonical_hash()


def _search(initial: Hashable,
            expand: Callable[[Hashable], Sequence[_Edge]],
            check: Callable[[Hashable], List[Tuple[str, str]]],
            state_cap: int,
            progress_every: int,
            subject: str) -> _Search:
    """Breadth-first search building the step graph and collecting safety violations."""
    graph = StateGraph()
    violations: List[SafetyViolation] = []
    count = 0

    def record(prop: str, witness: str, state: Hashable, schedule: Callable[[], List[ScheduledAction]]):
        nonlocal count
        count += 1
        if len(violations) < MAX_REPORTED:
            violations.append(SafetyViolation(prop, witness, _digest(state), schedule()))

    root, _ = graph.add_state(initial)
    for prop, witness in check(initial):
        record(prop, witness, initial, list)

    queue = deque([root])
    transitions = 0
    truncated = False
    while queue and not truncated:
        node = queue.popleft()
        for edge in expand(graph.states[node]):
            target = graph.index.get(edge.state)
            if target is None:
                if len(graph) >= state_cap:
                    truncated = True
                    break
                target, _ = graph.add_state(edge.state, node, edge.action)
                queue.append(target)
                for prop, witness in check(edge.state):
                    record(prop, witness, edge.state, lambda: graph.path_to(target))
                if progress_every and len(graph) % progress_every == 0:
                    logger.info(f"{subject}: {len(graph)} states, {len(queue)} queued")
            transitions += 1
            if edge.note is not None:
                record(edge.note[0], edge.note[1], edge.state, lambda: graph.path_to(node) + [edge.action])
            if edge.step:
                graph.add_edge(node, target)

    if truncated:
        logger.warning(f"{subject}: state cap {state_cap} reached, results are partial")
    return _Search(graph, violations, count, transitions, truncated)


def _analyse_components(search: _Search, report: ExplorationReport,
                        expand: Callable[[Hashable], Sequence[_Edge]],
                        good: Callable[[List[Hashable], bool], bool],
                        undecided: Callable[[Hashable], List[int]]):
    """Fill in terminal statistics and the bad bottom components."""
    graph = search.graph
    degrees = graph.out_degrees()
    report.terminal_count = int(np.count_nonzero(degrees == 0))
    if search.truncated:
        return

    def step_successors(node: int):
        return [(edge.action, graph.index[edge.state]) for edge in expand(graph.states[node]) if edge.step]

    for members in graph.bottom_components():
        states = [graph.states[node] for node in members]
        terminal = len(members) == 1 and degrees[members[0]] == 0
        if good(states, terminal):
            continue
        report.bad_component_count += 1
        if len(report.bad_components) >= MAX_REPORTED:
            continue
        start = int(members[0])
        report.bad_components.append(BadComponent(
            size=len(members),
            undecided=undecided(graph.states[start]),
            digest=_digest(graph.states[start]),
            prefix=graph.path_to(start),
            cycle=lasso_cycle(start, set(int(m) for m in members), step_successors),
        ))


def _system_expander(cfg: RunConfig, crash_parts: Optional[Counter] = None
                     ) -> Callable[[SystemState], List[_Edge]]:
    tolerated = cfg.f <= cfg.k

    def expand(state: SystemState) -> List[_Edge]:
        edges = []
        for action in enabled_actions(state, cfg):
            nxt, events = transition(state, action)
            note = None
            if action.kind == "crash":
                if crash_parts is not None:
                    crash_parts[len(state.participated)] += 1
                # within f <= k a process that launched thread T never crashes
                if tolerated and state.proc(action.pid).launched:
                    note = ("launched_crash", f"p{action.pid} crashed after launching thread T")
            else:
                current = state.file.read(DEC_REG)
                for event in events:
                    if event.op == "write" and event.reg == DEC_REG and current is not BOT \
                            and event.value != current:
                        note = ("dec_coherence", f"p{action.pid} overwrote DEC={current} with {event.value}")
            edges.append(_Edge(action, nxt, action.kind == "step", note))
        return edges

    return expand


def _system_checker(cfg: RunConfig) -> Callable[[SystemState], List[Tuple[str, str]]]:
    proposed = set(cfg.inputs)

    def check(state: SystemState) -> List[Tuple[str, str]]:
        problems = []
        decided = state.decided_values()
        for pid, value in sorted(decided.items()):
            if value not in proposed:
                problems.append(("validity", f"p{pid} decided unproposed value {value}"))
        if len(set(decided.values())) > 1:
            problems.append(("agreement", f"decisions differ: {dict(sorted(decided.items()))}"))
        dec = state.file.read(DEC_REG)
        if dec is not BOT and any(value != dec for value in decided.values()):
            problems.append(("dec_coherence", f"DEC={dec} but decisions are {dict(sorted(decided.items()))}"))
        return problems

    return check


def explore(cfg: RunConfig, state_cap: int = DEFAULT_STATE_CAP,
            progress_every: int = DEFAULT_PROGRESS_EVERY) -> ExplorationReport:
    """
    Exhaustively explore every run of a configuration.

    Args:
        cfg: Run configuration (seed, max_steps and crash_policy are ignored)
        state_cap: Maximum number of distinct states before giving up
        progress_every: Log progress every this many states, 0 to disable

    Returns:
        Exploration report; 'partial' when the state cap was hit
    """
    if state_cap < 1:
        raise ConfigurationError("state_cap", f"must be >= 1, got {state_cap}")
    started = time.perf_counter()
    subject = f"system n={cfg.n} k={cfg.k} f={cfg.f} inputs={list(cfg.inputs)}"
    crash_parts: Counter = Counter()

    search = _search(init_system(cfg), _system_expander(cfg, crash_parts), _system_checker(cfg),
                     state_cap, progress_every, subject)
    graph = search.graph
    report = ExplorationReport(
        subject=subject,
        states=len(graph),
        transitions=search.transitions,
        crash_transitions=sum(crash_parts.values()),
        truncated=search.truncated,
        safety_violations=search.violations,
        safety_violation_count=search.violation_count,
        crash_participation=dict(crash_parts),
        details={"cfg": cfg.to_dict()},
    )

    def good(states: List[SystemState], terminal: bool) -> bool:
        return terminal and states[0].all_correct_decided()

    _analyse_components(search, report, _system_expander(cfg), good,
                        lambda state: state.undecided_correct())

    degrees = graph.out_degrees()
    values = {v for node in np.flatnonzero(degrees == 0)
              for v in graph.states[node].decided_values().values()}
    report.decided_values = sorted(values)

    logger.log_performance("explore", time.perf_counter() - started,
                           {"states": report.states, "transitions": report.transitions,
                            "status": report.status})
    return report


class WitnessStatus(Enum):
    FOUND = "found"
    NONE = "none"
    INCONCLUSIVE = "inconclusive"


@dataclass
class TightnessResult:
    """Outcome of a tightness-witness search."""

    status: WitnessStatus
    report: ExplorationReport
    witness: Optional[BadComponent] = None

    @property
    def schedule(self) -> Optional[List[ScheduledAction]]:
        return self.witness.schedule if self.witness is not None else None

    def to_json(self) -> Dict[str, Any]:
        return {
            "status": self.status.value,
            "witness": self.witness.to_json() if self.witness is not None else None,
            "report": self.report.to_json(),
        }


def find_tightness_witness(cfg: RunConfig, state_cap: int = DEFAULT_STATE_CAP,
                           progress_every: int = DEFAULT_PROGRESS_EVERY) -> TightnessResult:
    """
    Search for a run in which one crash too many blocks a correct process.

    Args:
        cfg: Configuration with f = k + 1 <= n

    Returns:
        FOUND with the first bad component as a lasso schedule, NONE when
        the exploration passes, INCONCLUSIVE when the state cap was hit

    Raises:
        ConfigurationError: unless f = k + 1 <= n
    """
    if cfg.f != cfg.k + 1 or cfg.f > cfg.n:
        raise ConfigurationError("f", f"witness search needs f = k + 1 <= n, got f={cfg.f} k={cfg.k} n={cfg.n}")

    report = explore(cfg, state_cap, progress_every)
    if report.bad_components:
        witness = report.bad_components[0]
        logger.info(f"witness for {report.subject}: processes {witness.undecided} blocked after "
                    f"{len(witness.prefix)} actions, cycle of {len(witness.cycle)}")
        return TightnessResult(WitnessStatus.FOUND, report, witness)
    if report.truncated:
        return TightnessResult(WitnessStatus.INCONCLUSIVE, report)
    logger.error(f"no tightness witness for {report.subject}: every fair run terminates "
                 f"with f = k + 1 = {cfg.f} crashes")
    return TightnessResult(WitnessStatus.NONE, report)


class _ObjectState(NamedTuple):
    file: RegisterFile
    cursors: Tuple[Any, ...]

    def canonical_hash(self) -> str:
        return hashlib.blake2b(repr((self.file.cells, self.cursors)).encode("utf-8"), digest_size=16).hexdigest()


def _ac_expander(n: int) -> Callable[[_ObjectState], List[_Edge]]:
    bound = ac_step_bound(n)

    def expand(state: _ObjectState) -> List[_Edge]:
        edges = []
        for cursor in state.cursors:
            if cursor.done:
                continue
            nxt, file, result, _ = ac_step(cursor, state.file)
            note = None
            if result is not None and nxt.steps != bound:
                note = ("termination", f"p{cursor.pid} finished in {nxt.steps} steps, expected {bound}")
            cursors = state.cursors[:cursor.pid - 1] + (nxt,) + state.cursors[cursor.pid:]
            edges.append(_Edge(Step(cursor.pid, Thread.MAIN), _ObjectState(file, cursors), True, note))
        return edges

    return expand


def _arm_expander(state: _ObjectState) -> List[_Edge]:
    edges = []
    for cursor in state.cursors:
        if cursor.acquired:
            continue
        nxt, file, _, access = arm_step(cursor, state.file)
        note = None
        if access.op == "read" and file is not state.file:
            note = ("spin_stability", f"p{cursor.pid} changed registers while reading {access.reg}")
        cursors = state.cursors[:cursor.pid - 1] + (nxt,) + state.cursors[cursor.pid:]
        edges.append(_Edge(Step(cursor.pid, Thread.MAIN), _ObjectState(file, cursors), True, note))
    return edges


def explore_object(kind: ObjectKind, n: int, proposals: Optional[Sequence[int]] = None,
                   state_cap: int = DEFAULT_STATE_CAP,
                   progress_every: int = DEFAULT_PROGRESS_EVERY) -> ExplorationReport:
    """
    Explore every interleaving of one building-block object invoked by all n processes.

    Args:
        kind: Object to explore
        n: Number of invoking processes
        proposals: Adopt-commit proposals, one per process
        state_cap: Maximum number of distinct states

    Returns:
        Exploration report; safety covers validity, obligation and weak
        agreement plus the exact step count for adopt-commit, mutual
        exclusion and read stability for ARM. Liveness requires every
        adopt-commit bottom component to be a terminal state and every ARM
        bottom component to contain an acquirer.
    """
    kind = ObjectKind(kind)
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ConfigurationError("n", f"process count must be an integer >= 1, got {n!r}")
    if n > 3:
        logger.warning(f"exploring {kind.value} with n={n}; the state space grows quickly")
    started = time.perf_counter()
    file = new_register_file(n, 0)

    if kind is ObjectKind.ADOPT_COMMIT:
        if proposals is None or len(proposals) != n:
            raise ConfigurationError("proposals", f"expected {n} proposals, got {proposals!r}")
        proposal_map = {pid: value for pid, value in enumerate(proposals, start=1)}
        initial = _ObjectState(file, tuple(ac_init(pid, value, n) for pid, value in proposal_map.items()))
        expand = _ac_expander(n)
        subject = f"adopt_commit n={n} proposals={list(proposals)}"

        def check(state: _ObjectState) -> List[Tuple[str, str]]:
            results = {c.pid: c.result for c in state.cursors if c.done}
            return ac_violations(proposal_map, results)

        def good(states: List[_ObjectState], terminal: bool) -> bool:
            return terminal and all(c.done for c in states[0].cursors)

        def waiting(state: _ObjectState) -> List[int]:
            return [c.pid for c in state.cursors if not c.done]

        details = {"step_bound": ac_step_bound(n)}
    else:
        initial = _ObjectState(file, tuple(arm_init(pid, n) for pid in range(1, n + 1)))
        expand = _arm_expander
        subject = f"arm n={n}"

        def check(state: _ObjectState) -> List[Tuple[str, str]]:
            winners = acquirers(state.cursors)
            if len(winners) > 1:
                return [("mutual_exclusion", f"processes {winners} all acquired")]
            return []

        def good(states: List[_ObjectState], terminal: bool) -> bool:
            return any(acquirers(state.cursors) for state in states)

        def waiting(state: _ObjectState) -> List[int]:
            return [c.pid for c in state.cursors if not c.acquired]

        details = {}

    search = _search(initial, expand, check, state_cap, progress_every, subject)
    report = ExplorationReport(
        subject=subject,
        states=len(search.graph),
        transitions=search.transitions,
        truncated=search.truncated,
        safety_violations=search.violations,
        safety_violation_count=search.violation_count,
        details=details,
    )
    _analyse_components(search, report, expand, good, waiting)
    if kind is ObjectKind.ADOPT_COMMIT:
        graph = search.graph
        outcomes = {
            tuple((c.result[0].value, c.result[1]) for c in graph.states[node].cursors)
            for node in np.flatnonzero(graph.out_degrees() == 0)
        }
        report.details["outcomes"] = [list(map(list, outcome)) for outcome in sorted(outcomes)]

    logger.log_performance(f"explore_object {kind.value}", time.perf_counter() - started,
                           {"states": report.states, "status": report.status})
    return report


def sweep_if_direction(n_values: Sequence[int] = (2, 3), domain: Sequence[int] = (0, 1)) -> Iterator[RunConfig]:
    """
    Every configuration of the tolerated regime: each n, each 0 <= k <= n,
    each f <= k and each input vector over the domain.
    """
    for n in n_values:
        for k in range(n + 1):
            for f in range(k + 1):
                for inputs in itertools.product(domain, repeat=n):
                    yield RunConfig(n=n, k=k, f=f, inputs=inputs)
