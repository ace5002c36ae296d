"""
Main module demonstrating the Lambda Consensus simulator
"""

from lambda_consensus.analysis.explorer import ObjectKind, explore, explore_object, find_tightness_witness
from lambda_consensus.analysis.verdict import check_trace
from lambda_consensus.application.campaign import StressCampaign
from lambda_consensus.engine.runtime import RunConfig, regime_of, replay_state, run_random, run_schedule
from lambda_consensus.utils.logger import Logger, set_level


def random_runs():
    """Seeded random runs in each failure regime"""
    print("=== Random Runs ===")

    for k, f in ((0, 0), (1, 1), (3, 3)):
        cfg = RunConfig(n=3, k=k, f=f, inputs=(0, 1, 1), seed=42, crash_policy="random:0.1")
        trace = run_random(cfg)
        verdict = check_trace(trace, cfg)
        print(f"{regime_of(cfg)} (k={k}, f={f}): {len(trace.events)} actions, "
              f"crashed {trace.crashed()}, decisions {trace.decisions}, violated {verdict.violated}")

    cfg = RunConfig(n=3, k=1, f=1, inputs=(0, 1, 1), seed=42, crash_policy="random:0.1")
    trace = run_random(cfg)
    replayed = run_schedule(cfg, trace.actions())
    print(f"Replay reproduces the trace: {replayed.to_jsonl() == trace.to_jsonl()}")
    print("Random runs completed\n")


def stress_campaign():
    """A small seeded campaign"""
    print("=== Stress Campaign ===")

    cfg = RunConfig(n=4, k=2, f=2, inputs=(0, 1, 0, 1), crash_policy="random:0.05")
    report = StressCampaign(cfg, runs=200).run()
    print(f"{report.runs} runs, {report.complete} complete, {report.violations} with violations")
    print(f"Steps per run: {report.step_stats()}")
    print("Stress campaign completed\n")


def exhaustive_exploration():
    """Every interleaving of small systems and of the building blocks"""
    print("=== Exhaustive Exploration ===")

    for proposals in ((0, 0), (0, 1)):
        report = explore_object(ObjectKind.ADOPT_COMMIT, 2, proposals)
        print(f"{report.subject}: {report.status}, {report.states} states, "
              f"outcomes {report.details['outcomes']}")

    report = explore_object(ObjectKind.ARM, 3)
    print(f"{report.subject}: {report.status}, {report.states} states")

    for k, f in ((1, 1), (2, 2)):
        report = explore(RunConfig(n=2, k=k, f=f, inputs=(0, 1)))
        print(f"{report.subject}: {report.status}, liveness {report.liveness}, "
              f"{report.states} states, crash participation {report.crash_participation}")
    print("Exhaustive exploration completed\n")


def tightness_witness():
    """One crash beyond k blocks a correct process forever"""
    print("=== Tightness Witness ===")

    cfg = RunConfig(n=2, k=0, f=1, inputs=(0, 1))
    result = find_tightness_witness(cfg)
    print(f"Witness search: {result.status.value}")
    if result.witness is not None:
        witness = result.witness
        print(f"Prefix: {' '.join(str(a) for a in witness.prefix)}")
        print(f"Cycle:  {' '.join(str(a) for a in witness.cycle)}")
        entry = replay_state(cfg, witness.prefix)
        print(f"Cycle returns to the entry state: {replay_state(cfg, witness.schedule) == entry}")
        print(f"Blocked processes: {witness.undecided}")
    print("Tightness witness completed\n")


def main():
    """Run every demonstration"""
    set_level("WARNING")
    logger = Logger("demo")
    logger.info("Starting demonstrations")

    print("Lambda Consensus Demonstrations")
    print("=" * 40)

    random_runs()
    stress_campaign()
    exhaustive_exploration()
    tightness_witness()

    print("All demonstrations completed")


if __name__ == "__main__":
    main()
