"""
ARM Mutex Module: One-shot acquire-restricted deadlock-free mutex

A tournament tree of two-process Peterson locks with no release. Process
p enters at leaf node (p-1)//2 on side (p-1)%2, and the winner of node m
at level l moves to node m//2 at level l+1 on side m%2. Whoever clears
the top node has acquired; every other invoker spins forever.

Node registers: ARM[l][m][0] and ARM[l][m][1] are the side flags (⊥ or 1),
ARM[l][m][2] is the turn (⊥, 0 or 1).
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, List, Tuple

from ..utils.errors import InternalFault
from .shared_memory import BOT, LOCAL, TURN, Access, RegisterFile, arm_levels, arm_reg


class ArmPhase(Enum):
    WRITE_FLAG = "write_flag"
    WRITE_TURN = "write_turn"
    READ_PEER_FLAG = "read_peer_flag"
    READ_TURN = "read_turn"
    ACQUIRED = "acquired"


@dataclass(frozen=True)
class ArmCursor:
    """
    One process's position inside its acquire() invocation.

    Attributes:
        pid: Invoking process
        n: Number of processes
        levels: Height of the tournament (0 when n = 1)
        level: Current level
        node: Node index at the current level
        side: 0 or 1, the side of the node this process contends on
        phase: Position in the Peterson entry protocol
    """

    pid: int
    n: int
    levels: int
    level: int = 0
    node: int = 0
    side: int = 0
    phase: ArmPhase = ArmPhase.WRITE_FLAG

    @property
    def acquired(self) -> bool:
        return self.phase is ArmPhase.ACQUIRED


def arm_init(pid: int, n: int) -> ArmCursor:
    """
    Start an acquire() invocation at the process's leaf node.

    Raises:
        InternalFault: if pid is not in 1..n
    """
    if not 1 <= pid <= n:
        raise InternalFault(f"pid {pid} out of range 1..{n}")
    return ArmCursor(pid=pid, n=n, levels=arm_levels(n), node=(pid - 1) // 2, side=(pid - 1) % 2)


def _advance(cursor: ArmCursor) -> Tuple[ArmCursor, bool]:
    if cursor.level + 1 >= cursor.levels:
        return replace(cursor, phase=ArmPhase.ACQUIRED), True
    return replace(cursor, level=cursor.level + 1, node=cursor.node // 2,
                   side=cursor.node % 2, phase=ArmPhase.WRITE_FLAG), False


def arm_step(cursor: ArmCursor, file: RegisterFile
             ) -> Tuple[ArmCursor, RegisterFile, bool, Access]:
    """
    Perform one register access of the entry protocol at the current node.

    Args:
        cursor: A cursor that has not acquired
        file: Current register file

    Returns:
        Tuple of (next cursor, next file, acquired, access)

    Raises:
        InternalFault: if the cursor has already acquired
    """
    phase = cursor.phase
    if phase is ArmPhase.ACQUIRED:
        raise InternalFault(f"p{cursor.pid} stepped an acquired ARM cursor")

    if cursor.levels == 0:
        # n = 1: nobody to contend with
        return replace(cursor, phase=ArmPhase.ACQUIRED), file, True, LOCAL

    level, node, side = cursor.level, cursor.node, cursor.side

    if phase is ArmPhase.WRITE_FLAG:
        reg = arm_reg(level, node, side)
        file = file.write(reg, 1, cursor.pid)
        return replace(cursor, phase=ArmPhase.WRITE_TURN), file, False, Access("write", reg, 1)

    if phase is ArmPhase.WRITE_TURN:
        reg = arm_reg(level, node, TURN)
        file = file.write(reg, side, cursor.pid)
        return replace(cursor, phase=ArmPhase.READ_PEER_FLAG), file, False, Access("write", reg, side)

    if phase is ArmPhase.READ_PEER_FLAG:
        reg = arm_reg(level, node, 1 - side)
        value = file.read(reg)
        if value is BOT:
            nxt, acquired = _advance(cursor)
        else:
            nxt, acquired = replace(cursor, phase=ArmPhase.READ_TURN), False
        return nxt, file, acquired, Access("read", reg, value)

    # READ_TURN
    reg = arm_reg(level, node, TURN)
    value = file.read(reg)
    if value != side:
        nxt, acquired = _advance(cursor)
    else:
        nxt, acquired = replace(cursor, phase=ArmPhase.READ_PEER_FLAG), False
    return nxt, file, acquired, Access("read", reg, value)


def acquirers(cursors: Iterable[ArmCursor]) -> List[int]:
    """Pids whose cursor has acquired."""
    return [c.pid for c in cursors if c.acquired]
