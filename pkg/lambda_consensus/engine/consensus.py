"""
Consensus Module: Per-process state machine of the consensus protocol

Each process runs a main thread and, after an adopt result, a helper
thread T:

    main  L1  INPUT[i] <- in_i
          L2  repeat collect INPUT[1..n] until at most k entries are ⊥
          L3  val_i <- min of the collected values
          L4  (tag_i, res_i) <- AC.ac_propose(val_i)
          L5  if commit: DEC <- res_i; return DEC
          L6  launch T
          L7  wait DEC != ⊥; kill T; return DEC
    T     L8  ARM.acquire(); if DEC = ⊥ then DEC <- res_i

Every call to proc_step performs at most one shared-memory access.
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Iterable, NamedTuple, Optional, Tuple

from ..objects.adopt_commit import AcCursor, Tag, ac_init, ac_step
from ..objects.arm_mutex import ArmCursor, arm_init, arm_step
from ..objects.shared_memory import (
    BOT,
    DEC_REG,
    LOCAL,
    Access,
    RegisterFile,
    Value,
    input_reg,
    value_min,
)
from ..utils.errors import ContractViolation, InternalFault


class Thread(Enum):
    MAIN = "main"
    T = "T"


class MainPc(Enum):
    L1_WRITE = "L1_write"
    L2_READ = "L2_read"
    L3_MIN = "L3_min"
    L4_AC = "L4_ac"
    L5_WRITE_DEC = "L5_write_dec"
    L5_READ_DEC = "L5_read_dec"
    L7_READ_DEC = "L7_read_dec"
    DECIDED = "decided"


class ThreadState(Enum):
    NOT_LAUNCHED = "not_launched"
    T_ARM = "T_arm"
    T_READ_DEC = "T_read_dec"
    T_WRITE_DEC = "T_write_dec"
    T_DONE = "T_done"
    KILLED = "killed"


LIVE_T = frozenset({ThreadState.T_ARM, ThreadState.T_READ_DEC, ThreadState.T_WRITE_DEC})


@dataclass(frozen=True)
class ProcState:
    """
    Program counters and local variables of one process.

    Locals that can no longer influence the process are reset as soon as
    they die, so two states that differ only in history compare equal:
    the collect after L3, the adopt-commit cursor after L4, the ARM
    cursor once it acquires and every local but the decision and the
    state of T after a return.

    Attributes:
        pid: Process id (1-based)
        n: Number of processes
        k: Constrained-failure bound
        in_i: Proposed value
        input_i: Current collect of INPUT[1..n], all ⊥ outside L2 and L3
        j: Next INPUT index to read during the collect
        val: Minimum computed at L3, None before L3 and after deciding
        tag: Adopt-commit tag, None before L4 completes
        res: Adopt-commit value, None before L4 completes
        main_pc: Main-thread program counter
        ac: Adopt-commit cursor while at L4
        thread_t: State of thread T
        arm: ARM cursor while thread T contends for the ARM
        decision: Decided value once main_pc is DECIDED
    """

    pid: int
    n: int
    k: int
    in_i: int
    input_i: Tuple[Value, ...]
    j: int = 1
    val: Optional[int] = None
    tag: Optional[Tag] = None
    res: Optional[int] = None
    main_pc: MainPc = MainPc.L1_WRITE
    ac: Optional[AcCursor] = None
    thread_t: ThreadState = ThreadState.NOT_LAUNCHED
    arm: Optional[ArmCursor] = None
    decision: Optional[int] = None

    @property
    def decided(self) -> bool:
        return self.main_pc is MainPc.DECIDED

    @property
    def launched(self) -> bool:
        """Whether an adopt result has launched thread T."""
        return self.thread_t is not ThreadState.NOT_LAUNCHED


class DecisionRecord(NamedTuple):
    """A process's decision and the trace step at which it happened."""

    pid: int
    value: int
    step: int


def proc_init(pid: int, in_i: Any, n: int, k: int,
              input_domain: Optional[Iterable[int]] = None) -> ProcState:
    """
    Create a process about to invoke propose(in_i).

    Args:
        pid: Process id (1-based)
        in_i: Proposed value, a nonnegative integer
        n: Number of processes
        k: Constrained-failure bound
        input_domain: Allowed proposals, any nonnegative integer when None

    Raises:
        ContractViolation: if in_i is ⊥ or outside the input domain
    """
    if in_i is BOT or isinstance(in_i, bool) or not isinstance(in_i, int) or in_i < 0:
        raise ContractViolation(f"p{pid} cannot propose {in_i!r}")
    if input_domain is not None and in_i not in set(input_domain):
        raise ContractViolation(f"p{pid} proposal {in_i} is outside the input domain")
    return ProcState(pid=pid, n=n, k=k, in_i=in_i, input_i=(BOT,) * n)


def enabled_threads(p: ProcState) -> Tuple[Thread, ...]:
    """Threads of p that can take a step, main thread first."""
    if p.main_pc is MainPc.DECIDED:
        return ()
    if p.thread_t in LIVE_T:
        return (Thread.MAIN, Thread.T)
    return (Thread.MAIN,)


def _decide(p: ProcState, d: Value) -> ProcState:
    if d is BOT:
        raise InternalFault(f"p{p.pid} tried to decide ⊥")
    thread_t = ThreadState.KILLED if p.thread_t in LIVE_T else p.thread_t
    return replace(p, main_pc=MainPc.DECIDED, decision=d, thread_t=thread_t,
                   val=None, tag=None, res=None, ac=None, arm=None)


def retire(p: ProcState) -> ProcState:
    """Canonical local state of a crashed process, which never steps again."""
    return ProcState(pid=p.pid, n=p.n, k=p.k, in_i=p.in_i, input_i=(BOT,) * p.n)


def _main_step(p: ProcState, file: RegisterFile) -> Tuple[ProcState, RegisterFile, Tuple[Access, ...]]:
    pc = p.main_pc

    if pc is MainPc.L1_WRITE:
        reg = input_reg(p.pid)
        file = file.write(reg, p.in_i, p.pid)
        nxt = replace(p, main_pc=MainPc.L2_READ, j=1, input_i=(BOT,) * p.n)
        return nxt, file, (Access("write", reg, p.in_i),)

    if pc is MainPc.L2_READ:
        reg = input_reg(p.j)
        value = file.read(reg)
        collected = p.input_i[:p.j - 1] + (value,) + p.input_i[p.j:]
        if p.j < p.n:
            nxt = replace(p, j=p.j + 1, input_i=collected)
        elif sum(1 for v in collected if v is BOT) <= p.k:
            nxt = replace(p, main_pc=MainPc.L3_MIN, input_i=collected)
        else:
            # fresh collect from INPUT[1]
            nxt = replace(p, j=1, input_i=(BOT,) * p.n)
        return nxt, file, (Access("read", reg, value),)

    if pc is MainPc.L3_MIN:
        val = value_min(p.input_i)
        if val is BOT:
            raise InternalFault(f"p{p.pid} left the collect loop without a deposited value")
        nxt = replace(p, main_pc=MainPc.L4_AC, val=val, ac=ac_init(p.pid, val, p.n),
                      j=1, input_i=(BOT,) * p.n)
        return nxt, file, (LOCAL,)

    if pc is MainPc.L4_AC:
        ac, file, result, access = ac_step(p.ac, file)
        if result is None:
            return replace(p, ac=ac), file, (access,)
        tag, res = result
        if tag is Tag.COMMIT:
            nxt = replace(p, ac=None, tag=tag, res=res, main_pc=MainPc.L5_WRITE_DEC)
        else:
            # adopt: launch thread T
            nxt = replace(p, ac=None, tag=tag, res=res, main_pc=MainPc.L7_READ_DEC,
                          thread_t=ThreadState.T_ARM, arm=arm_init(p.pid, p.n))
        return nxt, file, (access,)

    if pc is MainPc.L5_WRITE_DEC:
        file = file.write(DEC_REG, p.res, p.pid)
        return replace(p, main_pc=MainPc.L5_READ_DEC), file, (Access("write", DEC_REG, p.res),)

    if pc is MainPc.L5_READ_DEC:
        d = file.read(DEC_REG)
        return _decide(p, d), file, (Access("read", DEC_REG, d), Access("decide", DEC_REG, d))

    if pc is MainPc.L7_READ_DEC:
        d = file.read(DEC_REG)
        if d is BOT:
            return p, file, (Access("read", DEC_REG, d),)
        return _decide(p, d), file, (Access("read", DEC_REG, d), Access("decide", DEC_REG, d))

    raise InternalFault(f"p{p.pid} main thread stepped after deciding")


def _thread_t_step(p: ProcState, file: RegisterFile) -> Tuple[ProcState, RegisterFile, Tuple[Access, ...]]:
    state = p.thread_t

    if state is ThreadState.T_ARM:
        arm, file, acquired, access = arm_step(p.arm, file)
        if acquired:
            return replace(p, arm=None, thread_t=ThreadState.T_READ_DEC), file, (access,)
        return replace(p, arm=arm), file, (access,)

    if state is ThreadState.T_READ_DEC:
        d = file.read(DEC_REG)
        thread_t = ThreadState.T_WRITE_DEC if d is BOT else ThreadState.T_DONE
        return replace(p, thread_t=thread_t), file, (Access("read", DEC_REG, d),)

    # T_WRITE_DEC
    file = file.write(DEC_REG, p.res, p.pid)
    return replace(p, thread_t=ThreadState.T_DONE), file, (Access("write", DEC_REG, p.res),)


def proc_step(p: ProcState, thread: Thread, file: RegisterFile
              ) -> Tuple[ProcState, RegisterFile, Tuple[Access, ...]]:
    """
    Advance one thread of a process by one atomic step.

    Args:
        p: Process state
        thread: Thread to step, must be enabled
        file: Current register file

    Returns:
        Tuple of (next process state, next file, events); events hold the
        step's single access, followed by a 'decide' event when the step
        returns from propose()

    Raises:
        InternalFault: if the thread is not enabled
    """
    if thread not in enabled_threads(p):
        raise InternalFault(f"p{p.pid} thread {thread.value} is not enabled")
    if thread is Thread.MAIN:
        return _main_step(p, file)
    return _thread_t_step(p, file)
