"""Tests for exhaustive exploration and the tightness-witness search."""

import itertools
from dataclasses import replace

import pytest

from lambda_consensus.analysis import explorer
from lambda_consensus.analysis.explorer import (
    ObjectKind,
    WitnessStatus,
    explore,
    explore_object,
    find_tightness_witness,
    sweep_if_direction,
)
from lambda_consensus.analysis.verdict import check_trace
from lambda_consensus.engine import runtime
from lambda_consensus.engine.consensus import MainPc, Thread
from lambda_consensus.engine.runtime import replay_state, run_schedule
from lambda_consensus.utils.errors import ConfigurationError, ScheduleLegalityError


class TestExploreSystem:
    def test_wait_free_pair(self, make_cfg):
        report = explore(make_cfg(2, 0, 0, [0, 1]))
        assert report.status == "pass"
        assert report.liveness == "pass"
        assert report.crash_participation == {}
        assert report.crash_transitions == 0
        assert set(report.decided_values) <= {0, 1}
        assert report.terminal_count > 0

    def test_constrained_pair(self, pair_cfg):
        report = explore(pair_cfg)
        assert report.status == "pass"
        assert report.exit_code == 0
        assert set(report.crash_participation) <= {0, 1}

    def test_initial_crashes_only(self, make_cfg):
        report = explore(make_cfg(2, 2, 2, [1, 0]))
        assert report.status == "pass"
        assert set(report.crash_participation) == {0}
        assert report.to_json()["crash_participation"] == {"0": report.crash_participation[0]}

    def test_unanimous_inputs_decide_that_value(self, make_cfg):
        report = explore(make_cfg(2, 1, 1, [1, 1]))
        assert report.decided_values == [1]

    def test_smallest_input_decided_without_failures(self, make_cfg):
        assert explore(make_cfg(2, 0, 0, [3, 9])).decided_values == [3]

    def test_deterministic(self, pair_cfg):
        assert explore(pair_cfg).to_json() == explore(pair_cfg).to_json()

    def test_state_cap(self, pair_cfg):
        report = explore(pair_cfg, state_cap=10)
        assert report.truncated
        assert report.states == 10
        assert report.status == "partial"
        assert report.liveness == "skipped"
        assert report.exit_code == 3

    def test_invalid_state_cap(self, pair_cfg):
        with pytest.raises(ConfigurationError):
            explore(pair_cfg, state_cap=0)

    @pytest.mark.slow
    def test_sweep_of_tolerated_regime(self):
        failures = []
        for cfg in sweep_if_direction():
            report = explore(cfg, progress_every=0)
            if report.status != "pass":
                failures.append((cfg.n, cfg.k, cfg.f, cfg.inputs, report.status))
        assert failures == []

    @pytest.mark.slow
    @pytest.mark.parametrize("f", [1, 2, 3])
    def test_initial_only_triple(self, make_cfg, f):
        report = explore(make_cfg(3, 3, f, [0, 1, 1]))
        assert report.status == "pass"
        assert set(report.crash_participation) == {0}

    @pytest.mark.slow
    def test_failure_free_triple(self, make_cfg):
        assert explore(make_cfg(3, 0, 0, [0, 1, 1])).status == "pass"


_honest_proc_step = runtime.proc_step


def _deciding(pid, value_of):
    """A proc_step under which one process decides value_of(its state) instead of DEC."""

    def step(p, thread, file):
        nxt, file, events = _honest_proc_step(p, thread, file)
        if p.pid == pid and nxt.decided and not p.decided:
            wrong = value_of(nxt)
            nxt = replace(nxt, decision=wrong)
            events = tuple(e._replace(value=wrong) if e.op == "decide" else e for e in events)
        return nxt, file, events

    return step


def _committing_own_input(p, thread, file):
    """A proc_step whose commit path writes the process's input to DEC."""
    if thread is Thread.MAIN and p.main_pc is MainPc.L5_WRITE_DEC:
        p = replace(p, res=p.in_i)
    return _honest_proc_step(p, thread, file)


class TestViolationReporting:
    def test_unproposed_decision(self, monkeypatch, make_cfg):
        monkeypatch.setattr(runtime, "proc_step", _deciding(1, lambda p: p.decision + 10))
        cfg = make_cfg(1, 0, 0, [0])
        report = explore(cfg)
        assert report.status == "fail"
        assert report.exit_code == 1
        first = report.safety_violations[0]
        assert first.property == "validity"
        assert report.first_witness() == first.schedule

        trace = run_schedule(cfg, first.schedule)
        assert trace.decisions == {1: 10}
        assert "validity" in check_trace(trace, cfg).violated

    def test_disagreement(self, monkeypatch, make_cfg):
        monkeypatch.setattr(explorer, "MAX_REPORTED", 10 ** 6)
        monkeypatch.setattr(runtime, "proc_step", _deciding(2, lambda p: p.in_i))
        cfg = make_cfg(2, 0, 0, [0, 1])
        report = explore(cfg)
        assert report.status == "fail"
        assert report.first_witness() is not None

        found = [v for v in report.safety_violations if v.property == "agreement"]
        assert found
        trace = run_schedule(cfg, found[0].schedule)
        assert trace.decisions == {1: 0, 2: 1}
        assert "agreement" in check_trace(trace, cfg).violated

    def test_dec_overwrite(self, monkeypatch, make_cfg):
        monkeypatch.setattr(runtime, "proc_step", _committing_own_input)
        cfg = make_cfg(2, 0, 0, [0, 1])
        report = explore(cfg)
        assert report.status == "fail"
        overwrites = [v for v in report.safety_violations if v.property == "dec_coherence"]
        assert any("overwrote DEC" in v.witness for v in overwrites)
        for violation in overwrites:
            trace = run_schedule(cfg, violation.schedule)
            assert "coherence" in check_trace(trace, cfg).violated

    def test_crash_after_launch(self, monkeypatch, pair_cfg):
        def ignoring_lambda(state, cfg, pid):
            return (pid not in state.crashed and not state.proc(pid).decided
                    and state.crash_count < cfg.f)

        monkeypatch.setattr(runtime, "crash_allowed", ignoring_lambda)
        report = explore(pair_cfg)
        found = [v for v in report.safety_violations if v.property == "launched_crash"]
        assert found
        schedule = found[0].schedule
        assert schedule[-1].kind == "crash"
        with pytest.raises(ScheduleLegalityError) as info:
            run_schedule(pair_cfg, schedule)
        assert info.value.rule == "lambda"
        assert info.value.position == len(schedule) - 1

    def test_adopt_commit_step_count(self, monkeypatch):
        monkeypatch.setattr(explorer, "ac_step_bound", lambda n: 2 * n + 3)
        report = explore_object(ObjectKind.ADOPT_COMMIT, 1, [4])
        assert report.status == "fail"
        assert [v.property for v in report.safety_violations] == ["termination"]
        assert "expected 5" in report.safety_violations[0].witness
        assert len(report.first_witness()) == 4

    def test_arm_read_that_writes(self, monkeypatch):
        honest = explorer.arm_step

        def step(cursor, file):
            nxt, file, acquired, access = honest(cursor, file)
            if access.op == "read":
                file = replace(file)
            return nxt, file, acquired, access

        monkeypatch.setattr(explorer, "arm_step", step)
        report = explore_object(ObjectKind.ARM, 2)
        assert report.status == "fail"
        assert {v.property for v in report.safety_violations} == {"spin_stability"}
        assert report.first_witness() is not None


def test_sweep_enumerates_tolerated_configurations():
    configs = list(sweep_if_direction(n_values=(2,)))
    # k in 0..2, f in 0..k, four input vectors
    assert len(configs) == (1 + 2 + 3) * 4
    assert all(cfg.f <= cfg.k for cfg in configs)


class TestTightnessWitness:
    def test_wait_free_pair_blocks(self, make_cfg):
        cfg = make_cfg(2, 0, 1, [0, 1])
        result = find_tightness_witness(cfg)
        assert result.status is WitnessStatus.FOUND
        witness = result.witness
        assert witness.cycle
        entry = replay_state(cfg, witness.prefix)
        assert replay_state(cfg, witness.schedule) == entry
        assert witness.undecided
        assert all(pid not in entry.crashed for pid in witness.undecided)
        assert result.to_json()["status"] == "found"

    def test_no_witness_without_spare_process(self, make_cfg):
        result = find_tightness_witness(make_cfg(2, 1, 2, [0, 1]))
        assert result.status is WitnessStatus.NONE
        assert result.schedule is None

    @pytest.mark.parametrize("k, f", [(1, 1), (0, 2), (2, 2)])
    def test_requires_f_one_above_k(self, make_cfg, k, f):
        with pytest.raises(ConfigurationError) as info:
            find_tightness_witness(make_cfg(2, k, f, [0, 1]))
        assert info.value.field == "f"

    def test_inconclusive_under_cap(self, make_cfg):
        result = find_tightness_witness(make_cfg(3, 1, 2, [0, 1, 1]), state_cap=5)
        assert result.status is WitnessStatus.INCONCLUSIVE
        assert result.report.truncated

    @pytest.mark.slow
    def test_constrained_triple_blocks(self, make_cfg):
        cfg = make_cfg(3, 1, 2, [0, 1, 1])
        result = find_tightness_witness(cfg)
        assert result.status is WitnessStatus.FOUND
        assert replay_state(cfg, result.schedule) == replay_state(cfg, result.witness.prefix)


class TestExploreObject:
    def test_adopt_commit_unanimous(self):
        report = explore_object(ObjectKind.ADOPT_COMMIT, 2, [4, 4])
        assert report.status == "pass"
        assert report.details["step_bound"] == 6
        assert report.details["outcomes"] == [[["commit", 4], ["commit", 4]]]

    def test_adopt_commit_split(self):
        report = explore_object(ObjectKind.ADOPT_COMMIT, 2, [0, 1])
        assert report.status == "pass"
        outcomes = report.details["outcomes"]
        assert [["adopt", 0], ["adopt", 1]] in outcomes
        assert [["commit", 0], ["adopt", 0]] in outcomes
        for outcome in outcomes:
            committed = {value for tag, value in outcome if tag == "commit"}
            assert len(committed) <= 1
            if committed:
                assert {value for _, value in outcome} == committed

    @pytest.mark.parametrize("n", [2, 3])
    def test_arm(self, n):
        report = explore_object(ObjectKind.ARM, n)
        assert report.status == "pass"
        assert report.liveness == "pass"
        assert report.safety_violation_count == 0

    def test_proposals_required(self):
        with pytest.raises(ConfigurationError) as info:
            explore_object(ObjectKind.ADOPT_COMMIT, 2, [0])
        assert info.value.field == "proposals"

    def test_kind_from_string(self):
        assert explore_object("arm", 1).status == "pass"

    @pytest.mark.slow
    @pytest.mark.parametrize("proposals", list(itertools.product((0, 1), repeat=3)))
    def test_adopt_commit_triples(self, proposals):
        report = explore_object(ObjectKind.ADOPT_COMMIT, 3, list(proposals))
        assert report.status == "pass"
