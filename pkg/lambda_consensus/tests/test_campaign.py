"""Tests for seeded stress campaigns."""

import math

import pytest

from lambda_consensus.application.campaign import StressCampaign, run_one
from lambda_consensus.engine.runtime import MAX_SEED
from lambda_consensus.utils.errors import ConfigurationError


def test_run_one_offsets_seed(make_cfg):
    cfg = make_cfg(3, 1, 1, [0, 1, 1], seed=40, crash_policy="random:0.1")
    outcome = run_one(cfg, 2)
    assert outcome.seed == 42
    assert outcome.complete
    assert outcome.violated == []
    assert outcome.retried_complete is None


def test_run_one_wraps_seed(make_cfg):
    cfg = make_cfg(1, 0, 0, [3], seed=MAX_SEED - 1)
    assert run_one(cfg, 1).seed == 0


def test_incomplete_run_is_retried(make_cfg):
    cfg = make_cfg(2, 0, 0, [0, 1], max_steps=3)
    outcome = run_one(cfg, 0, retry_factor=1000)
    assert not outcome.complete
    assert outcome.retried_complete is True
    assert not outcome.has_violation


def test_small_campaign(make_cfg):
    cfg = make_cfg(3, 2, 2, [0, 1, 0], crash_policy="random:0.05")
    report = StressCampaign(cfg, runs=50).run()
    assert report.runs == 50
    assert [o.index for o in report.outcomes] == list(range(50))
    assert report.violations == 0
    assert report.complete == 50
    assert report.exit_code == 0
    document = report.to_json()
    assert document["cfg"]["lambda"] == 1
    assert document["steps"]["max"] >= document["steps"]["mean"] > 0
    assert document["violating_runs"] == []


def test_unresolved_runs_are_inconclusive(make_cfg):
    cfg = make_cfg(2, 0, 0, [0, 1], max_steps=3)
    report = StressCampaign(cfg, runs=5, retry_factor=1).run()
    assert report.inconclusive == 5
    assert report.unresolved == 5
    assert report.exit_code == 3
    assert len(report.to_json()["incomplete_runs"]) == 5


def test_workers_give_same_report(make_cfg):
    cfg = make_cfg(3, 1, 1, [1, 0, 1], seed=7, crash_policy="latest")
    serial = StressCampaign(cfg, runs=40).run()
    parallel = StressCampaign(cfg, runs=40, workers=2).run()
    assert parallel.to_json() == serial.to_json()


@pytest.mark.parametrize("fields, name", [
    (dict(runs=-1), "runs"),
    (dict(workers=0), "workers"),
    (dict(retry_factor=0), "retry_factor"),
    (dict(runs=True), "runs"),
])
def test_invalid_campaign(pair_cfg, fields, name):
    with pytest.raises(ConfigurationError) as info:
        StressCampaign(pair_cfg, **fields)
    assert info.value.field == name


def test_empty_campaign(pair_cfg):
    report = StressCampaign(pair_cfg, runs=0).run()
    assert report.step_stats() == {"mean": 0.0, "max": 0.0, "p99": 0.0}
    assert report.complete_ratio == 1.0


@pytest.mark.slow
@pytest.mark.parametrize("n", [4, 5, 6])
def test_constrained_acceptance(make_cfg, n):
    k = math.ceil(n / 2)
    cfg = make_cfg(n, k, k, [i % 2 for i in range(n)], crash_policy="random:0.05")
    report = StressCampaign(cfg, runs=10_000, workers=4).run()
    assert report.violations == 0
    assert report.complete_ratio >= 0.99
    assert report.unresolved == 0
