"""
CLI Module: Command-line front end

    lambda-consensus run      one seeded random run and its verdict
    lambda-consensus stress   many seeded runs (seed, seed+1, ...)
    lambda-consensus explore  exhaustive exploration of every run
    lambda-consensus replay   replay a schedule file and check it
    lambda-consensus witness  search a tightness witness at f = k + 1

Exit codes: 0 every property holds, 1 a violation was found, 2 bad
configuration, usage or input file, 3 inconclusive.
"""

import argparse
import json
import sys
from typing import Any, Dict, List, Optional, Sequence, Tuple

from . import __version__
from .analysis.explorer import ObjectKind, WitnessStatus, explore, explore_object, find_tightness_witness
from .analysis.verdict import check_trace
from .application.campaign import StressCampaign
from .engine.runtime import RunConfig, run_random, run_schedule
from .engine.trace import ScheduledAction, Trace, dump_schedule, load_schedule
from .utils.config import Config
from .utils.errors import ConfigurationError, ContractViolation, ScheduleLegalityError, SchemaError
from .utils.logger import Logger, set_level

logger = Logger("cli")

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3
DEFAULT_WITNESS_FILE = "witness.json"
RUN_FIELDS = ("n", "k", "f", "inputs", "seed", "max_steps", "crash_policy", "input_domain")


def _int_list(name: str, text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigurationError(name, f"expected a comma-separated list of integers, got {text!r}") from None


def load_settings(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> Config:
    """
    Settings from an optional JSON file, then non-None overrides on top.

    Raises:
        ConfigurationError: on an unreadable file or an unknown field
    """
    settings = Config(path)
    if overrides:
        settings.update({key: value for key, value in overrides.items() if value is not None})
    return settings


def run_config(settings: Config) -> RunConfig:
    fields = {key: value for key, value in settings.run_fields().items() if value is not None}
    return RunConfig.from_dict(fields)


def load_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Build a run configuration from a JSON file and flag overrides.

    Args:
        path: JSON file with flat fields ("n", "k", ...) or nested sections
        overrides: Field values taking precedence over the file

    Raises:
        ConfigurationError: naming the missing or invalid field
    """
    return run_config(load_settings(path, overrides))


def _dump(document: Any) -> str:
    return json.dumps(document, indent=2)


def _emit(document: Any, args):
    """Print a report, on one line for --format jsonl."""
    if args.format == "jsonl":
        print(json.dumps(document, separators=(",", ":")))
    else:
        print(_dump(document))


def _write(path: str, text: str):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigurationError("trace_out", f"cannot write {path}: {exc}") from None


def _emit_trace(trace: Trace, cfg: RunConfig, args) -> int:
    verdict = check_trace(trace, cfg)
    if args.trace_out:
        _write(args.trace_out, trace.to_jsonl())
    if args.format == "jsonl":
        sys.stdout.write(trace.to_jsonl())
        print(json.dumps({"verdict": verdict.to_json()}, separators=(",", ":")))
    else:
        print(_dump({
            "cfg": cfg.to_dict(),
            "steps": len(trace.events),
            "crashed": trace.crashed(),
            "decisions": {str(pid): value for pid, value in sorted(trace.decisions.items())},
            "verdict": verdict.to_json(),
        }))
    if verdict.violated:
        logger.error(f"violated: {', '.join(verdict.violated)}")
    return verdict.exit_code


def cmd_run(args, settings: Config) -> int:
    cfg = run_config(settings)
    logger.info(f"run n={cfg.n} k={cfg.k} f={cfg.f} seed={cfg.seed} policy={cfg.crash_policy}")
    return _emit_trace(run_random(cfg), cfg, args)


def cmd_stress(args, settings: Config) -> int:
    cfg = run_config(settings)
    campaign = StressCampaign(
        cfg,
        runs=settings.get("campaign.runs"),
        workers=settings.get("campaign.max_concurrent_operations"),
        retry_factor=settings.get("campaign.retry_factor"),
    )
    report = campaign.run()
    if args.format == "jsonl":
        for outcome in report.outcomes:
            print(json.dumps({"index": outcome.index, "seed": outcome.seed, "steps": outcome.steps,
                              "complete": outcome.complete, "violated": outcome.violated,
                              "retried_complete": outcome.retried_complete}, separators=(",", ":")))
        print(json.dumps({"summary": report.to_json()}, separators=(",", ":")))
    else:
        print(_dump(report.to_json()))
    return report.exit_code


def _explore_object(args, settings: Config) -> int:
    n = settings.get("system.n")
    if n is None:
        raise ConfigurationError("n", "missing required field")
    kind = ObjectKind(args.object)
    proposals = settings.get("system.inputs") if kind is ObjectKind.ADOPT_COMMIT else None
    report = explore_object(kind, n, proposals, state_cap=settings.get("exploration.state_cap"),
                            progress_every=settings.get("exploration.progress_every"))
    _emit(report.to_json(), args)
    return report.exit_code


def cmd_explore(args, settings: Config) -> int:
    if args.object:
        return _explore_object(args, settings)
    cfg = run_config(settings)
    report = explore(cfg, state_cap=settings.get("exploration.state_cap"),
                     progress_every=settings.get("exploration.progress_every"))
    witness = report.first_witness()
    if args.trace_out and witness is not None:
        _write(args.trace_out, dump_schedule(witness))
    _emit(report.to_json(), args)
    return report.exit_code


def _read_schedule(path: str) -> Tuple[List[ScheduledAction], Dict[str, Any]]:
    """Actions of a schedule file or of a trace file, plus the trace header if any."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None
    if text.lstrip().startswith("["):
        return load_schedule(text), {}
    trace = Trace.from_jsonl(text)
    return trace.actions(), trace.cfg


def cmd_replay(args, settings: Config) -> int:
    actions, header = _read_schedule(args.schedule_in)
    if header:
        # the config file and flags win over the trace header
        settings = load_settings(None, {key: header[key] for key in RUN_FIELDS if header.get(key) is not None})
        if args.config:
            settings.load_from_file(args.config)
        settings.update({key: value for key, value in _overrides(args).items() if value is not None})
    cfg = run_config(settings)
    return _emit_trace(run_schedule(cfg, actions), cfg, args)


def cmd_witness(args, settings: Config) -> int:
    cfg = run_config(settings)
    result = find_tightness_witness(cfg, state_cap=settings.get("exploration.state_cap"),
                                    progress_every=settings.get("exploration.progress_every"))
    if result.status is WitnessStatus.FOUND:
        _write(args.trace_out or DEFAULT_WITNESS_FILE, dump_schedule(result.schedule))
    _emit(result.to_json(), args)
    if result.report.safety_violation_count:
        return EXIT_VIOLATION
    return {WitnessStatus.FOUND: EXIT_OK, WitnessStatus.NONE: EXIT_VIOLATION,
            WitnessStatus.INCONCLUSIVE: EXIT_INCONCLUSIVE}[result.status]


def _system_flags(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("system")
    group.add_argument("--config", help="JSON configuration file; flags override its values")
    group.add_argument("--n", type=int, help="number of processes")
    group.add_argument("--k", type=int, help="constrained-failure bound")
    group.add_argument("--f", type=int, help="crash budget")
    group.add_argument("--inputs", help="comma-separated proposals, one per process")
    group.add_argument("--input-domain", help="comma-separated allowed proposals")
    group.add_argument("--seed", type=int, help="scheduler seed")
    group.add_argument("--max-steps", type=int, help="step cap of a random run")
    group.add_argument("--crash-policy", help="none, eager, latest or random:<p>")
    parser.add_argument("--format", choices=("jsonl", "summary"), default="summary")
    parser.add_argument("--trace-out", help="write the trace or schedule here")
    parser.add_argument("--save-config", help="write the resolved settings to this JSON file")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lambda-consensus",
        description="Simulate and model-check consensus under lambda-constrained crash failures.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="one seeded random run")
    _system_flags(run)
    run.set_defaults(handler=cmd_run)

    stress = commands.add_parser("stress", help="many seeded random runs")
    _system_flags(stress)
    stress.add_argument("--runs", type=int, help="number of runs")
    stress.add_argument("--workers", type=int, help="worker processes")
    stress.add_argument("--retry-factor", type=int, help="max_steps multiplier for retrying incomplete runs")
    stress.set_defaults(handler=cmd_stress)

    explore_cmd = commands.add_parser("explore", help="exhaustive exploration")
    _system_flags(explore_cmd)
    explore_cmd.add_argument("--state-cap", type=int, help="maximum number of states")
    explore_cmd.add_argument("--object", choices=[kind.value for kind in ObjectKind],
                             help="explore one building block instead of the whole system")
    explore_cmd.set_defaults(handler=cmd_explore)

    replay = commands.add_parser("replay", help="replay a schedule or trace file")
    _system_flags(replay)
    replay.add_argument("--schedule-in", required=True, help="schedule (JSON array) or trace (JSON Lines)")
    replay.set_defaults(handler=cmd_replay)

    witness = commands.add_parser("witness", help="search a tightness witness at f = k + 1")
    _system_flags(witness)
    witness.add_argument("--state-cap", type=int, help="maximum number of states")
    witness.set_defaults(handler=cmd_witness)
    return parser


def _overrides(args) -> Dict[str, Any]:
    overrides = {
        "n": args.n,
        "k": args.k,
        "f": args.f,
        "seed": args.seed,
        "max_steps": args.max_steps,
        "crash_policy": args.crash_policy,
        "state_cap": getattr(args, "state_cap", None),
        "runs": getattr(args, "runs", None),
        "workers": getattr(args, "workers", None),
        "retry_factor": getattr(args, "retry_factor", None),
    }
    if args.inputs is not None:
        overrides["inputs"] = _int_list("inputs", args.inputs)
    if args.input_domain is not None:
        overrides["input_domain"] = _int_list("input_domain", args.input_domain)
    return overrides


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        settings = load_settings(args.config, _overrides(args))
        if args.log_level:
            settings.set("logging.level", args.log_level)
        try:
            set_level(settings.get("logging.level"))
        except ValueError as exc:
            raise ConfigurationError("log_level", str(exc)) from None
        if args.save_config:
            settings.save_to_file(args.save_config)
        return args.handler(args, settings)
    except (ConfigurationError, ContractViolation, SchemaError, ScheduleLegalityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
