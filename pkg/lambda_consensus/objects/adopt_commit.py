"""
Adopt-Commit Module: Wait-free one-shot adopt-commit object

Two-phase construction over single-writer registers AC.A[1..n] and
AC.B[1..n]:

    1. A[i] <- v
    2. collect A[1..n]; single <- every non-⊥ entry equals v
    3. B[i] <- (single|multi, v)
    4. collect B[1..n]; every non-⊥ entry is (single, v)  -> (commit, v)
                        else some entry is (single, w)    -> (adopt, w)
                        else                              -> (adopt, v)

The object is driven through a cursor, one register access per step, so
the caller decides how invocations interleave.
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

from ..utils.errors import ContractViolation, InternalFault
from .shared_memory import BOT, Access, RegisterFile, ac_a_reg, ac_b_reg


class Tag(Enum):
    COMMIT = "commit"
    ADOPT = "adopt"


class Marker(Enum):
    SINGLE = "single"
    MULTI = "multi"


class AcRecord(NamedTuple):
    """Contents of an AC.B register."""

    marker: Marker
    value: int

    def to_json(self) -> Dict[str, Any]:
        return {"m": self.marker.value, "v": self.value}


class AcPhase(Enum):
    WRITE_A = "write_a"
    COLLECT_A = "collect_a"
    WRITE_B = "write_b"
    COLLECT_B = "collect_b"
    DONE = "done"


AcResult = Tuple[Tag, int]


@dataclass(frozen=True)
class AcCursor:
    """
    One process's position inside its ac_propose invocation.

    Attributes:
        pid: Invoking process
        n: Number of processes
        proposal: Proposed value
        phase: Current phase of the construction
        j: Next index to read during a collect (1-based)
        single: Whether the A entries read so far hold only the proposal
        unanimous: Whether the B entries read so far are all (single, proposal)
        first_single: Value of the lowest-index (single, w) B entry read so far
        result: (tag, value) once the cursor is done
        steps: Number of steps taken so far
    """

    pid: int
    n: int
    proposal: int
    phase: AcPhase = AcPhase.WRITE_A
    j: int = 1
    single: bool = True
    unanimous: bool = True
    first_single: Optional[int] = None
    result: Optional[AcResult] = None
    steps: int = 0

    @property
    def done(self) -> bool:
        return self.phase is AcPhase.DONE


def ac_init(pid: int, value: Any, n: int) -> AcCursor:
    """
    Start an ac_propose(value) invocation for a process.

    Args:
        pid: Invoking process (1-based)
        value: Proposed integer, never ⊥
        n: Number of processes sharing the object

    Raises:
        ContractViolation: if the proposal is ⊥ or not a nonnegative integer
        InternalFault: if pid is out of range
    """
    if value is BOT or isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise ContractViolation(f"p{pid} cannot propose {value!r} to adopt-commit")
    if not 1 <= pid <= n:
        raise InternalFault(f"pid {pid} out of range 1..{n}")
    return AcCursor(pid=pid, n=n, proposal=value)


def _observe_b(cursor: AcCursor, entry: Any) -> AcCursor:
    """Fold one B entry into the running summary of the collect."""
    if entry is BOT:
        return cursor
    single = entry.marker is Marker.SINGLE
    unanimous = cursor.unanimous and single and entry.value == cursor.proposal
    first = cursor.first_single
    if single and first is None:
        # lowest index wins
        first = entry.value
    return replace(cursor, unanimous=unanimous, first_single=first)


def _decide(cursor: AcCursor) -> AcResult:
    if cursor.unanimous:
        return Tag.COMMIT, cursor.proposal
    if cursor.first_single is not None:
        return Tag.ADOPT, cursor.first_single
    return Tag.ADOPT, cursor.proposal


def ac_step(cursor: AcCursor, file: RegisterFile
            ) -> Tuple[AcCursor, RegisterFile, Optional[AcResult], Access]:
    """
    Perform exactly one register access of the construction.

    Args:
        cursor: A cursor that is not done
        file: Current register file

    Returns:
        Tuple of (next cursor, next file, result, access); result is set
        only on the final step

    Raises:
        InternalFault: if the cursor is already done
    """
    pid, n = cursor.pid, cursor.n
    steps = cursor.steps + 1
    phase = cursor.phase

    if phase is AcPhase.WRITE_A:
        reg = ac_a_reg(pid)
        file = file.write(reg, cursor.proposal, pid)
        nxt = replace(cursor, phase=AcPhase.COLLECT_A, j=1, single=True, steps=steps)
        return nxt, file, None, Access("write", reg, cursor.proposal)

    if phase is AcPhase.COLLECT_A:
        reg = ac_a_reg(cursor.j)
        value = file.read(reg)
        single = cursor.single and (value is BOT or value == cursor.proposal)
        if cursor.j < n:
            nxt = replace(cursor, j=cursor.j + 1, single=single, steps=steps)
        else:
            nxt = replace(cursor, phase=AcPhase.WRITE_B, single=single, steps=steps)
        return nxt, file, None, Access("read", reg, value)

    if phase is AcPhase.WRITE_B:
        reg = ac_b_reg(pid)
        record = AcRecord(Marker.SINGLE if cursor.single else Marker.MULTI, cursor.proposal)
        file = file.write(reg, record, pid)
        nxt = replace(cursor, phase=AcPhase.COLLECT_B, j=1, unanimous=True, first_single=None, steps=steps)
        return nxt, file, None, Access("write", reg, record)

    if phase is AcPhase.COLLECT_B:
        reg = ac_b_reg(cursor.j)
        value = file.read(reg)
        seen = _observe_b(cursor, value)
        if cursor.j < n:
            nxt = replace(seen, j=cursor.j + 1, steps=steps)
            return nxt, file, None, Access("read", reg, value)
        result = _decide(seen)
        nxt = replace(seen, phase=AcPhase.DONE, result=result, steps=steps)
        return nxt, file, result, Access("read", reg, value)

    raise InternalFault(f"p{pid} stepped a finished adopt-commit cursor")


def ac_step_bound(n: int) -> int:
    """Exact number of steps an invocation takes: two writes and two n-read collects."""
    if n < 1:
        raise InternalFault(f"adopt-commit needs n >= 1, got {n}")
    return 2 * n + 2


def ac_violations(proposals: Dict[int, int], results: Dict[int, AcResult]) -> List[Tuple[str, str]]:
    """
    Check the adopt-commit properties over the invocations of one run.

    Args:
        proposals: Proposal of every invoking process, by pid
        results: Result of every completed invocation, by pid

    Returns:
        List of (property, witness) pairs, empty when every property holds
    """
    violations = []
    proposed = set(proposals.values())

    for pid, (tag, value) in sorted(results.items()):
        if value not in proposed:
            violations.append(("validity", f"p{pid} returned unproposed value {value}"))

    if len(proposed) == 1:
        (v,) = proposed
        for pid, result in sorted(results.items()):
            if result != (Tag.COMMIT, v):
                violations.append(("obligation", f"p{pid} returned {result[0].value} {result[1]} on unanimous {v}"))

    committed = sorted((pid, value) for pid, (tag, value) in results.items() if tag is Tag.COMMIT)
    if committed:
        committer, v = committed[0]
        for pid, (tag, value) in sorted(results.items()):
            if value != v:
                violations.append(("weak_agreement",
                                   f"p{committer} committed {v} but p{pid} returned {tag.value} {value}"))

    return violations
