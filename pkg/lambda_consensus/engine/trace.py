"""
Trace Module: Event log of a run and its JSON Lines encoding

Layout of a trace document:

    {"cfg": {...}}                                   header
    {"i": 0, "act": "step", "pid": 1, ...}           one record per action
    {"complete": true, "decisions": {"1": 7}}        footer
"""

import json
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, NamedTuple, Optional

from ..utils.errors import SchemaError
from .consensus import Thread

EVENT_KEYS = ("i", "act", "pid", "thr", "op", "reg", "val", "parts", "crashes")
STEP_OPS = ("read", "write", "local", "decide")


class ScheduledAction(NamedTuple):
    """
    One scheduler choice: step a thread of a process, or crash a process.

    Attributes:
        kind: 'step' or 'crash'
        pid: Target process (1-based)
        thread: Thread to step, None for crashes
    """

    kind: str
    pid: int
    thread: Optional[Thread] = None

    def __str__(self) -> str:
        if self.kind == "crash":
            return f"Crash({self.pid})"
        return f"Step({self.pid},{self.thread.value})"

    def to_json(self) -> Dict[str, Any]:
        if self.kind == "crash":
            return {"act": "crash", "pid": self.pid}
        return {"act": "step", "pid": self.pid, "thr": self.thread.value}

    @staticmethod
    def from_json(record: Any) -> "ScheduledAction":
        """
        Parse an action record.

        Raises:
            SchemaError: if the record is not a valid action
        """
        if not isinstance(record, dict):
            raise SchemaError(f"action must be an object, got {record!r}")
        act, pid = record.get("act"), record.get("pid")
        if isinstance(pid, bool) or not isinstance(pid, int):
            raise SchemaError(f"action pid must be an integer, got {pid!r}")
        if act == "crash":
            return Crash(pid)
        if act == "step":
            try:
                return Step(pid, Thread(record.get("thr")))
            except ValueError:
                raise SchemaError(f"unknown thread {record.get('thr')!r}") from None
        raise SchemaError(f"unknown action kind {act!r}")


def Step(pid: int, thread: Thread = Thread.MAIN) -> ScheduledAction:
    return ScheduledAction("step", pid, thread)


def Crash(pid: int) -> ScheduledAction:
    return ScheduledAction("crash", pid, None)


@dataclass(frozen=True)
class TraceEvent:
    """One trace record. Values are already JSON-encoded (⊥ is "bot")."""

    i: int
    act: str
    pid: int
    thr: Optional[str] = None
    op: Optional[str] = None
    reg: Optional[str] = None
    val: Any = None
    parts: int = 0
    crashes: int = 0

    def to_json(self) -> Dict[str, Any]:
        return {key: getattr(self, key) for key in EVENT_KEYS}

    @property
    def action(self) -> ScheduledAction:
        if self.act == "crash":
            return Crash(self.pid)
        return Step(self.pid, Thread(self.thr))

    @staticmethod
    def from_json(record: Any) -> "TraceEvent":
        """
        Parse an event record.

        Raises:
            SchemaError: on missing fields or invalid field types
        """
        if not isinstance(record, dict):
            raise SchemaError(f"event must be an object, got {record!r}")
        missing = [key for key in EVENT_KEYS if key not in record]
        if missing:
            raise SchemaError(f"event record missing {', '.join(missing)}")
        for key in ("i", "pid", "parts", "crashes"):
            if isinstance(record[key], bool) or not isinstance(record[key], int):
                raise SchemaError(f"event field {key} must be an integer, got {record[key]!r}")
        if record["act"] not in ("step", "crash"):
            raise SchemaError(f"unknown event kind {record['act']!r}")
        if record["act"] == "step":
            if record["thr"] not in ("main", "T"):
                raise SchemaError(f"unknown thread {record['thr']!r}")
            if record["op"] not in STEP_OPS:
                raise SchemaError(f"unknown op {record['op']!r}")
        return TraceEvent(**{key: record[key] for key in EVENT_KEYS})


@dataclass
class Trace:
    """
    Ordered event log of one run.

    Attributes:
        cfg: Configuration header (the RunConfig as a dict)
        events: Event records, indexed from 0
        decisions: Decided value per pid
        complete: Whether every non-crashed process decided
    """

    cfg: Dict[str, Any]
    events: List[TraceEvent] = field(default_factory=list)
    decisions: Dict[int, int] = field(default_factory=dict)
    complete: bool = False

    def actions(self) -> List[ScheduledAction]:
        """The schedule that produced this trace."""
        return [event.action for event in self.events]

    def crashed(self) -> List[int]:
        return sorted(event.pid for event in self.events if event.act == "crash")

    def records(self) -> List[Dict[str, Any]]:
        header = {"cfg": self.cfg}
        footer = {
            "complete": self.complete,
            "decisions": {str(pid): value for pid, value in sorted(self.decisions.items())},
        }
        return [header] + [event.to_json() for event in self.events] + [footer]

    def to_jsonl(self) -> str:
        """Encode as JSON Lines, one record per line, trailing newline included."""
        return "".join(json.dumps(record, separators=(",", ":")) + "\n" for record in self.records())

    @staticmethod
    def from_jsonl(text: str) -> "Trace":
        """
        Decode a JSON Lines trace.

        Raises:
            SchemaError: if the document is not a well-formed trace
        """
        lines = [line for line in text.splitlines() if line.strip()]
        if len(lines) < 2:
            raise SchemaError("trace needs at least a header and a footer")
        try:
            records = [json.loads(line) for line in lines]
        except json.JSONDecodeError as exc:
            raise SchemaError(f"trace line is not JSON: {exc}") from None

        header, footer = records[0], records[-1]
        if not isinstance(header, dict) or not isinstance(header.get("cfg"), dict):
            raise SchemaError("trace header must be {\"cfg\": {...}}")
        if not isinstance(footer, dict) or not isinstance(footer.get("complete"), bool) \
                or not isinstance(footer.get("decisions"), dict):
            raise SchemaError("trace footer must hold 'complete' and 'decisions'")

        try:
            decisions = {int(pid): value for pid, value in footer["decisions"].items()}
        except ValueError:
            raise SchemaError("decision keys must be process ids") from None

        return Trace(
            cfg=header["cfg"],
            events=[TraceEvent.from_json(record) for record in records[1:-1]],
            decisions=decisions,
            complete=footer["complete"],
        )


def dump_schedule(actions: Iterable[ScheduledAction]) -> str:
    """Encode a schedule file: a JSON array of actions."""
    return json.dumps([action.to_json() for action in actions], indent=1) + "\n"


def load_schedule(text: str) -> List[ScheduledAction]:
    """
    Decode a schedule file.

    Raises:
        SchemaError: if the document is not a JSON array of actions
    """
    try:
        records = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"schedule is not JSON: {exc}") from None
    if not isinstance(records, list):
        raise SchemaError("schedule must be a JSON array")
    return [ScheduledAction.from_json(record) for record in records]
