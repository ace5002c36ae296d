"""Tests for the trace and schedule encodings."""

import json

import pytest

from lambda_consensus.engine.consensus import Thread
from lambda_consensus.engine.runtime import run_random, run_schedule
from lambda_consensus.engine.trace import (
    Crash,
    ScheduledAction,
    Step,
    Trace,
    TraceEvent,
    dump_schedule,
    load_schedule,
)
from lambda_consensus.utils.errors import SchemaError


@pytest.fixture
def solo_trace(solo_cfg):
    return run_random(solo_cfg)


class TestScheduledAction:
    def test_str(self):
        assert str(Step(2, Thread.T)) == "Step(2,T)"
        assert str(Crash(3)) == "Crash(3)"

    def test_json_forms(self):
        assert Step(1).to_json() == {"act": "step", "pid": 1, "thr": "main"}
        assert Crash(2).to_json() == {"act": "crash", "pid": 2}
        assert ScheduledAction.from_json({"act": "step", "pid": 2, "thr": "T"}) == Step(2, Thread.T)

    @pytest.mark.parametrize("record", [
        ["step", 1],
        {"act": "step", "pid": "1", "thr": "main"},
        {"act": "step", "pid": True, "thr": "main"},
        {"act": "step", "pid": 1, "thr": "helper"},
        {"act": "pause", "pid": 1},
    ])
    def test_rejects_malformed(self, record):
        with pytest.raises(SchemaError):
            ScheduledAction.from_json(record)


class TestTraceJsonl:
    def test_layout(self, solo_trace):
        lines = solo_trace.to_jsonl().splitlines()
        assert len(lines) == len(solo_trace.events) + 2
        assert json.loads(lines[0])["cfg"]["lambda"] == 1
        first = json.loads(lines[1])
        assert first == {"i": 0, "act": "step", "pid": 1, "thr": "main", "op": "write",
                         "reg": "INPUT[1]", "val": 7, "parts": 1, "crashes": 0}
        assert json.loads(lines[-1]) == {"complete": True, "decisions": {"1": 7}}

    def test_decode_matches(self, solo_trace):
        decoded = Trace.from_jsonl(solo_trace.to_jsonl())
        assert decoded == solo_trace
        assert decoded.actions() == [Step(1)] * 9

    def test_bot_values_are_strings(self, pair_cfg):
        trace = run_schedule(pair_cfg, [Step(1), Step(1), Step(1)])
        assert [e.val for e in trace.events] == [0, 0, "bot"]
        assert not trace.complete

    def test_crashed_listed(self, pair_cfg):
        trace = run_schedule(pair_cfg, [Crash(2), Step(1)])
        assert trace.crashed() == [2]
        assert trace.events[0].to_json()["op"] is None

    @pytest.mark.parametrize("text", [
        "",
        '{"cfg": {}}\n',
        'not json\n{"complete": true, "decisions": {}}\n',
        '{"config": {}}\n{"complete": true, "decisions": {}}\n',
        '{"cfg": {}}\n{"complete": "yes", "decisions": {}}\n',
        '{"cfg": {}}\n{"complete": true, "decisions": {"p1": 0}}\n',
        '{"cfg": {}}\n{"i": 0, "act": "step"}\n{"complete": true, "decisions": {}}\n',
    ])
    def test_malformed_traces(self, text):
        with pytest.raises(SchemaError):
            Trace.from_jsonl(text)

    def test_unknown_op(self):
        record = {"i": 0, "act": "step", "pid": 1, "thr": "main", "op": "cas",
                  "reg": "DEC", "val": 0, "parts": 1, "crashes": 0}
        with pytest.raises(SchemaError, match="unknown op"):
            TraceEvent.from_json(record)


class TestScheduleFile:
    def test_dump_and_load(self):
        schedule = [Crash(2), Step(1), Step(1, Thread.T)]
        text = dump_schedule(schedule)
        assert isinstance(json.loads(text), list)
        assert load_schedule(text) == schedule

    @pytest.mark.parametrize("text", ["{", '{"act": "crash", "pid": 1}', '[{"act": "crash"}]'])
    def test_rejects(self, text):
        with pytest.raises(SchemaError):
            load_schedule(text)
