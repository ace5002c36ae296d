"""
Verdict Module: Consensus and failure-model checks over a finished trace
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional

from ..engine.runtime import RunConfig
from ..engine.trace import Trace, TraceEvent
from ..objects.shared_memory import RegisterLayout
from ..utils.errors import SchemaError

HEADER_FIELDS = ("n", "k", "f", "inputs")
PROPERTIES = ("validity", "agreement", "termination", "legality", "coherence", "swmr")


class Status(Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one property, with a witness when it does not pass."""

    status: Status = Status.PASS
    witness: Optional[Dict[str, Any]] = None

    @property
    def passed(self) -> bool:
        return self.status is Status.PASS

    def to_json(self) -> Dict[str, Any]:
        document: Dict[str, Any] = {"status": self.status.value}
        if self.witness is not None:
            document["witness"] = self.witness
        return document


PASS = CheckResult()


def _fail(**witness) -> CheckResult:
    return CheckResult(Status.FAIL, witness)


@dataclass(frozen=True)
class Verdict:
    """
    Evaluated properties of one trace.

    Attributes:
        validity: Every decided value was proposed
        agreement: No two decided values differ
        termination: Every correct process decided (inconclusive when the
            run hit its step cap)
        legality: Every crash respected lambda and f, no crashed process stepped
        coherence: Every write to DEC carried the same value
        swmr: Single-writer registers were written only by their owners
        complete: Completion flag of the trace
    """

    validity: CheckResult = PASS
    agreement: CheckResult = PASS
    termination: CheckResult = PASS
    legality: CheckResult = PASS
    coherence: CheckResult = PASS
    swmr: CheckResult = PASS
    complete: bool = True

    def results(self) -> Dict[str, CheckResult]:
        return {name: getattr(self, name) for name in PROPERTIES}

    @property
    def violated(self) -> List[str]:
        """Names of the failed properties."""
        return [name for name, result in self.results().items() if result.status is Status.FAIL]

    @property
    def inconclusive(self) -> bool:
        return not self.violated and self.termination.status is Status.INCONCLUSIVE

    @property
    def exit_code(self) -> int:
        if self.violated:
            return 1
        if self.inconclusive:
            return 3
        return 0

    def to_json(self) -> Dict[str, Any]:
        document = {name: result.to_json() for name, result in self.results().items()}
        document["complete"] = self.complete
        return document


def _check_schema(trace: Trace, cfg: RunConfig) -> Dict[int, int]:
    """Validate a trace against its configuration; returns the step of each decision."""
    expected = cfg.to_dict()
    for name in HEADER_FIELDS:
        if trace.cfg.get(name) != expected[name]:
            raise SchemaError(f"trace header {name}={trace.cfg.get(name)!r} does not match "
                              f"configuration {name}={expected[name]!r}")

    decision_steps: Dict[int, int] = {}
    for position, event in enumerate(trace.events):
        if event.i != position:
            raise SchemaError(f"event {position} carries index {event.i}")
        if not 1 <= event.pid <= cfg.n:
            raise SchemaError(f"event {position} names unknown process p{event.pid}")
        if event.op == "decide":
            if event.pid in decision_steps:
                raise SchemaError(f"p{event.pid} decides twice (events {decision_steps[event.pid]} and {position})")
            if trace.decisions.get(event.pid) != event.val:
                raise SchemaError(f"event {position} decides {event.val!r} but the footer records "
                                  f"{trace.decisions.get(event.pid)!r} for p{event.pid}")
            decision_steps[event.pid] = position

    for pid in trace.decisions:
        if not 1 <= pid <= cfg.n:
            raise SchemaError(f"footer names unknown process p{pid}")
    return decision_steps


def _check_validity(trace: Trace, cfg: RunConfig, steps: Dict[int, int]) -> CheckResult:
    for pid, value in sorted(trace.decisions.items()):
        if value not in cfg.inputs:
            return _fail(pid=pid, value=value, step=steps.get(pid), inputs=list(cfg.inputs))
    return PASS


def _check_agreement(trace: Trace, steps: Dict[int, int]) -> CheckResult:
    decided = sorted(trace.decisions.items())
    for pid, value in decided:
        for other, other_value in decided:
            if other > pid and other_value != value:
                return _fail(pids=[pid, other], values=[value, other_value],
                             steps=[steps.get(pid), steps.get(other)])
    return PASS


def _check_termination(trace: Trace, cfg: RunConfig) -> CheckResult:
    crashed = set(trace.crashed())
    undecided = [pid for pid in range(1, cfg.n + 1) if pid not in crashed and pid not in trace.decisions]
    if not trace.complete:
        return CheckResult(Status.INCONCLUSIVE, {"undecided": undecided, "steps": len(trace.events)})
    if undecided:
        raise SchemaError(f"trace is marked complete but {undecided} never decided")
    return PASS


def _check_legality(trace: Trace, cfg: RunConfig) -> CheckResult:
    participated, crashed, decided = set(), set(), set()
    crashes = 0
    for event in trace.events:
        pid = event.pid
        if pid in crashed:
            return _fail(step=event.i, pid=pid, rule="crashed")
        if event.act == "crash":
            if pid in decided:
                return _fail(step=event.i, pid=pid, rule="decided")
            if len(participated) > cfg.lambda_:
                return _fail(step=event.i, pid=pid, rule="lambda", parts=len(participated))
            crashes += 1
            if crashes > cfg.f:
                return _fail(step=event.i, pid=pid, rule="budget", crashes=crashes)
            crashed.add(pid)
        else:
            if pid in decided:
                return _fail(step=event.i, pid=pid, rule="decided")
            if event.op != "local":
                participated.add(pid)
            if event.op == "decide":
                decided.add(pid)
        if event.parts != len(participated) or event.crashes != crashes:
            return _fail(step=event.i, pid=pid, rule="bookkeeping",
                         recorded=[event.parts, event.crashes], derived=[len(participated), crashes])
    return PASS


def _writes(trace: Trace) -> List[TraceEvent]:
    return [event for event in trace.events if event.op == "write"]


def _check_coherence(trace: Trace) -> CheckResult:
    first: Optional[TraceEvent] = None
    for event in _writes(trace):
        if event.reg != "DEC":
            continue
        if first is None:
            first = event
        elif event.val != first.val:
            return _fail(steps=[first.i, event.i], values=[first.val, event.val])
    return PASS


def _check_swmr(trace: Trace, cfg: RunConfig) -> CheckResult:
    layout = RegisterLayout.for_size(cfg.n)
    owners = {str(reg): owner for reg, owner in zip(layout.ids, layout.owners)}
    for event in trace.events:
        if event.op in ("read", "write", "decide") and event.reg not in owners:
            raise SchemaError(f"event {event.i} accesses unknown register {event.reg!r}")
    for event in _writes(trace):
        owner = owners[event.reg]
        if owner is not None and owner != event.pid:
            return _fail(step=event.i, reg=event.reg, writer=event.pid, owner=owner)
    return PASS


def check_trace(trace: Trace, cfg: RunConfig) -> Verdict:
    """
    Evaluate a finished trace.

    Args:
        trace: Trace of a run of cfg
        cfg: Configuration the trace was produced under

    Returns:
        Verdict with one result per property

    Raises:
        SchemaError: if the trace is malformed or does not belong to cfg
    """
    steps = _check_schema(trace, cfg)
    return Verdict(
        validity=_check_validity(trace, cfg, steps),
        agreement=_check_agreement(trace, steps),
        termination=_check_termination(trace, cfg),
        legality=_check_legality(trace, cfg),
        coherence=_check_coherence(trace),
        swmr=_check_swmr(trace, cfg),
        complete=trace.complete,
    )

