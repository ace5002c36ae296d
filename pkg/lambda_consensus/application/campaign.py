"""
Campaign Module: Seeded stress campaigns over many random runs
"""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from ..analysis.verdict import check_trace
from ..engine.runtime import MAX_SEED, RunConfig, run_random
from ..utils.errors import ConfigurationError
from ..utils.logger import Logger

logger = Logger("campaign")

MAX_LISTED_RUNS = 20


@dataclass
class RunOutcome:
    """
    Result of one seeded run of a campaign.

    Attributes:
        index: Run index within the campaign
        seed: Seed the run used (base seed + index)
        steps: Number of actions in the trace
        complete: Whether every correct process decided within max_steps
        violated: Properties the verdict failed
        retried_complete: Completion of the longer retry, None when not retried
        retry_violated: Properties the retry's verdict failed
    """

    index: int
    seed: int
    steps: int
    complete: bool
    violated: List[str] = field(default_factory=list)
    retried_complete: Optional[bool] = None
    retry_violated: List[str] = field(default_factory=list)

    @property
    def has_violation(self) -> bool:
        return bool(self.violated or self.retry_violated)


def run_one(cfg: RunConfig, index: int, retry_factor: int = 10) -> RunOutcome:
    """
    Run and check seed cfg.seed + index, retrying an incomplete run with
    max_steps * retry_factor.
    """
    run_cfg = cfg.with_overrides(seed=(cfg.seed + index) % MAX_SEED)
    trace = run_random(run_cfg)
    outcome = RunOutcome(index=index, seed=run_cfg.seed, steps=len(trace.events),
                         complete=trace.complete, violated=check_trace(trace, run_cfg).violated)
    if not trace.complete and retry_factor > 1:
        retry_cfg = run_cfg.with_overrides(max_steps=run_cfg.max_steps * retry_factor)
        retry = run_random(retry_cfg)
        outcome.retried_complete = retry.complete
        outcome.retry_violated = check_trace(retry, retry_cfg).violated
    return outcome


@dataclass
class CampaignReport:
    """Aggregate of a stress campaign, runs ordered by index."""

    cfg: RunConfig
    outcomes: List[RunOutcome]
    retry_factor: int

    @property
    def runs(self) -> int:
        return len(self.outcomes)

    @property
    def complete(self) -> int:
        return sum(1 for o in self.outcomes if o.complete)

    @property
    def inconclusive(self) -> int:
        return self.runs - self.complete

    @property
    def retried_complete(self) -> int:
        return sum(1 for o in self.outcomes if o.retried_complete)

    @property
    def unresolved(self) -> int:
        """Runs incomplete even after their retry."""
        return sum(1 for o in self.outcomes if not o.complete and not o.retried_complete)

    @property
    def violations(self) -> int:
        return sum(1 for o in self.outcomes if o.has_violation)

    @property
    def complete_ratio(self) -> float:
        return self.complete / self.runs if self.runs else 1.0

    def step_stats(self) -> Dict[str, float]:
        """Mean, max and 99th percentile of the action count per run."""
        if not self.outcomes:
            return {"mean": 0.0, "max": 0.0, "p99": 0.0}
        steps = np.array([o.steps for o in self.outcomes], dtype=np.int64)
        return {
            "mean": round(float(steps.mean()), 3),
            "max": float(steps.max()),
            "p99": float(np.percentile(steps, 99)),
        }

    @property
    def exit_code(self) -> int:
        if self.violations:
            return 1
        if self.unresolved:
            return 3
        return 0

    def to_json(self) -> Dict[str, Any]:
        failing = [o for o in self.outcomes if o.has_violation][:MAX_LISTED_RUNS]
        incomplete = [o for o in self.outcomes if not o.complete][:MAX_LISTED_RUNS]
        return {
            "cfg": self.cfg.to_dict(),
            "runs": self.runs,
            "complete": self.complete,
            "inconclusive": self.inconclusive,
            "violations": self.violations,
            "retry_factor": self.retry_factor,
            "retried_complete": self.retried_complete,
            "unresolved": self.unresolved,
            "steps": self.step_stats(),
            "violating_runs": [
                {"index": o.index, "seed": o.seed, "violated": sorted(set(o.violated + o.retry_violated))}
                for o in failing
            ],
            "incomplete_runs": [
                {"index": o.index, "seed": o.seed, "retried_complete": o.retried_complete}
                for o in incomplete
            ],
        }


class StressCampaign:
    """
    Many independent seeded runs of one configuration.

    Run i uses seed cfg.seed + i, so a campaign is reproducible from its
    base seed alone. Runs share nothing and may execute in worker
    processes; results are ordered by run index before aggregation.
    """

    def __init__(self, cfg: RunConfig, runs: int = 1000, workers: int = 1, retry_factor: int = 10):
        """
        Initialize the campaign.

        Args:
            cfg: Base configuration
            runs: Number of runs
            workers: Worker processes, 1 to run in-process
            retry_factor: max_steps multiplier for retrying incomplete runs
        """
        for name, value, low in (("runs", runs, 0), ("workers", workers, 1), ("retry_factor", retry_factor, 1)):
            if isinstance(value, bool) or not isinstance(value, int) or value < low:
                raise ConfigurationError(name, f"must be an integer >= {low}, got {value!r}")
        self.cfg = cfg
        self.runs = runs
        self.workers = workers
        self.retry_factor = retry_factor

    def run(self) -> CampaignReport:
        started = time.perf_counter()
        indices = range(self.runs)
        if self.workers == 1:
            outcomes = [run_one(self.cfg, i, self.retry_factor) for i in indices]
        else:
            chunksize = max(1, self.runs // (self.workers * 8))
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                outcomes = list(pool.map(run_one, [self.cfg] * self.runs, indices,
                                         [self.retry_factor] * self.runs, chunksize=chunksize))
        outcomes.sort(key=lambda o: o.index)

        report = CampaignReport(self.cfg, outcomes, self.retry_factor)
        logger.log_performance("stress", time.perf_counter() - started,
                               {"runs": report.runs, "complete": report.complete,
                                "violations": report.violations, "workers": self.workers})
        if report.violations:
            logger.error(f"{report.violations} of {report.runs} runs violated a property")
        elif report.inconclusive:
            logger.warning(f"{report.inconclusive} runs incomplete, {report.retried_complete} "
                           f"completed with max_steps x{self.retry_factor}")
        return report
