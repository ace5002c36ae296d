"""Tests for the per-process consensus state machine."""

from dataclasses import replace

import pytest

from lambda_consensus.engine.consensus import (
    MainPc,
    Thread,
    ThreadState,
    enabled_threads,
    proc_init,
    proc_step,
)
from lambda_consensus.objects.adopt_commit import Tag
from lambda_consensus.objects.arm_mutex import arm_init
from lambda_consensus.objects.shared_memory import BOT, DEC_REG, input_reg, new_register_file
from lambda_consensus.utils.errors import ContractViolation, InternalFault


def drive(p, file, limit=100):
    """Step the main thread of a lone process until it decides."""
    ops = []
    for _ in range(limit):
        if p.decided:
            return p, file, ops
        p, file, events = proc_step(p, Thread.MAIN, file)
        ops.extend(event.op for event in events)
    raise AssertionError("process did not decide")


class TestInit:
    def test_fresh_process(self):
        p = proc_init(1, 0, n=2, k=1)
        assert p.main_pc is MainPc.L1_WRITE
        assert p.input_i == (BOT, BOT)
        assert p.thread_t is ThreadState.NOT_LAUNCHED
        assert enabled_threads(p) == (Thread.MAIN,)

    def test_bot_proposal_rejected(self):
        with pytest.raises(ContractViolation):
            proc_init(1, BOT, n=2, k=1)

    def test_input_domain_enforced(self):
        assert proc_init(1, 1, n=2, k=1, input_domain=(0, 1)).in_i == 1
        with pytest.raises(ContractViolation):
            proc_init(1, 2, n=2, k=1, input_domain=(0, 1))


class TestMainThread:
    def test_solo_decides_own_input(self):
        p, file, ops = drive(proc_init(1, 7, n=1, k=0), new_register_file(1, 0))
        assert p.decision == 7
        assert file.read(DEC_REG) == 7
        # L1, collect, min, four adopt-commit steps, DEC write, DEC read + decide
        assert ops == ["write", "read", "local", "write", "read", "write", "read", "write", "read", "decide"]

    def test_line_one_writes_input(self):
        p, file, events = proc_step(proc_init(2, 3, n=2, k=1), Thread.MAIN, new_register_file(2, 1))
        assert file.read(input_reg(2)) == 3
        assert [e.op for e in events] == ["write"]
        assert p.main_pc is MainPc.L2_READ

    def test_collect_restarts_with_too_many_bots(self):
        file = new_register_file(2, 0)
        p, file, _ = proc_step(proc_init(1, 0, n=2, k=0), Thread.MAIN, file)
        p, file, _ = proc_step(p, Thread.MAIN, file)
        assert p.j == 2 and p.input_i == (0, BOT)
        p, file, _ = proc_step(p, Thread.MAIN, file)
        assert p.main_pc is MainPc.L2_READ
        assert p.j == 1 and p.input_i == (BOT, BOT)

    def test_collect_passes_with_k_bots(self):
        file = new_register_file(2, 1)
        p, file, _ = proc_step(proc_init(1, 0, n=2, k=1), Thread.MAIN, file)
        p, file, _ = proc_step(p, Thread.MAIN, file)
        p, file, _ = proc_step(p, Thread.MAIN, file)
        assert p.main_pc is MainPc.L3_MIN
        p, file, events = proc_step(p, Thread.MAIN, file)
        assert p.val == 0 and p.main_pc is MainPc.L4_AC
        assert p.j == 1 and p.input_i == (BOT, BOT)
        assert not events[0].is_shared

    def test_min_uses_smallest_deposit(self):
        file = new_register_file(2, 0).write(input_reg(2), 0, writer=2)
        p, _, _ = drive(proc_init(1, 1, n=2, k=0), file)
        assert p.decision == 0 and p.val is None

    def test_adopt_commit_cursor_dropped_on_completion(self):
        file = new_register_file(1, 0)
        p = proc_init(1, 7, n=1, k=0)
        while p.main_pc is not MainPc.L5_WRITE_DEC:
            p, file, _ = proc_step(p, Thread.MAIN, file)
        assert p.ac is None
        assert (p.tag, p.res) == (Tag.COMMIT, 7)


class TestThreadT:
    def waiting(self, thread_t=ThreadState.T_ARM):
        p = proc_init(1, 0, n=2, k=1)
        return replace(p, main_pc=MainPc.L7_READ_DEC, tag=Tag.ADOPT, res=0, val=0,
                       thread_t=thread_t, arm=arm_init(1, 2))

    def test_both_threads_enabled_while_waiting(self):
        assert enabled_threads(self.waiting()) == (Thread.MAIN, Thread.T)

    def test_main_spins_on_bot(self):
        p = self.waiting()
        file = new_register_file(2, 1)
        nxt, same_file, events = proc_step(p, Thread.MAIN, file)
        assert nxt == p and same_file is file
        assert [e.op for e in events] == ["read"]

    def test_decide_kills_live_thread(self):
        file = new_register_file(2, 1).write(DEC_REG, 0, writer=2)
        p, _, events = proc_step(self.waiting(), Thread.MAIN, file)
        assert p.decided and p.decision == 0
        assert p.thread_t is ThreadState.KILLED
        assert p.arm is None and p.res is None
        assert [e.op for e in events] == ["read", "decide"]
        assert enabled_threads(p) == ()

    def test_finished_thread_stays_done(self):
        file = new_register_file(2, 1).write(DEC_REG, 0, writer=2)
        p, _, _ = proc_step(self.waiting(ThreadState.T_DONE), Thread.MAIN, file)
        assert p.thread_t is ThreadState.T_DONE

    def test_winner_writes_dec(self):
        p = self.waiting()
        file = new_register_file(2, 1)
        while p.thread_t is ThreadState.T_ARM:
            p, file, _ = proc_step(p, Thread.T, file)
        assert p.arm is None
        p, file, _ = proc_step(p, Thread.T, file)
        assert p.thread_t is ThreadState.T_WRITE_DEC
        p, file, events = proc_step(p, Thread.T, file)
        assert p.thread_t is ThreadState.T_DONE
        assert file.read(DEC_REG) == 0
        assert events[0].op == "write"

    def test_winner_skips_write_when_dec_set(self):
        p = replace(self.waiting(), thread_t=ThreadState.T_READ_DEC)
        file = new_register_file(2, 1).write(DEC_REG, 0, writer=2)
        p, _, _ = proc_step(p, Thread.T, file)
        assert p.thread_t is ThreadState.T_DONE

    def test_stepping_disabled_thread(self):
        with pytest.raises(InternalFault):
            proc_step(proc_init(1, 0, n=2, k=1), Thread.T, new_register_file(2, 1))
