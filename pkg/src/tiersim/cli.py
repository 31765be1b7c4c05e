"""Command-line front end.

Subcommands: ``gen-trace`` (write a workload's trace file), ``run`` (one
experiment, CSV/JSON report), ``sweep`` (one axis, comparison table),
``report`` (re-serialize a stored JSON result).  Exit codes: 0 success,
1 configuration error, 2 I/O error, 3 simulation error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .core import ConfigError, SimulationError, TraceIOError, write_trace
from .harness import (
    EpochReport,
    ExperimentConfig,
    ExperimentResult,
    PolicyConfig,
    ProfilerConfig,
    build_trace,
    load_config,
    run_experiment,
    run_sweep,
    write_report,
    write_sweep_report,
)
from .profilers import ProfilerKind

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_SIMULATION = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on usage errors; that slot belongs to
    I/O failures here, so usage problems surface as config errors."""

    def error(self, message):
        raise ConfigError(message)


def _apply_overrides(cfg: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    # collect every override first: validation must see the final
    # combination (e.g. --profiler pmu --policy fixed:100 together)
    changes: dict = {}
    if getattr(args, "seed", None) is not None:
        changes["sim"] = dataclasses.replace(cfg.sim, rng_seed=args.seed)
    if getattr(args, "profiler", None) is not None and args.profiler != cfg.profiler.kind.value:
        changes["profiler"] = ProfilerConfig(kind=ProfilerKind.from_name(args.profiler))
    if getattr(args, "policy", None) is not None:
        changes["policy"] = PolicyConfig.from_flag(args.policy)
    return dataclasses.replace(cfg, **changes) if changes else cfg


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="experiment config (JSON)")
    parser.add_argument("--seed", type=int, help="override sim.rng_seed")


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--profiler", choices=[k.value for k in ProfilerKind],
        help="override the profiler backend",
    )
    parser.add_argument(
        "--policy", help="override the policy: dynamic, none, or fixed:<theta>"
    )
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--format", choices=["csv", "json"], default="csv")


def _cmd_gen_trace(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    trace = build_trace(cfg)
    write_trace(trace, args.out)
    print(f"wrote {trace.size} events to {args.out}")
    return EXIT_OK


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    result = run_experiment(cfg)
    write_report(result, args.out if args.out else sys.stdout, fmt=args.format)
    return EXIT_OK


def _parse_sweep_values(text: str) -> list:
    values = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            raise ConfigError("empty value in --values")
        try:
            values.append(json.loads(chunk))
        except json.JSONDecodeError:
            values.append(chunk)
    return values


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    sweep = run_sweep(cfg, args.axis, _parse_sweep_values(args.values))
    write_sweep_report(sweep, args.out if args.out else sys.stdout, fmt=args.format)
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    try:
        doc = json.loads(Path(args.infile).read_text())
    except OSError as exc:
        raise TraceIOError(f"cannot read {args.infile}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{args.infile} is not a JSON result: {exc}") from None
    try:
        config = ExperimentConfig.from_dict(doc["config"])
        reports = [EpochReport(**row) for row in doc["epochs"]]
        result = ExperimentResult(
            config=config, reports=reports,
            summary=doc["summary"], metadata=doc["metadata"],
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{args.infile} is not a run result: {exc}") from None
    if not result.reports:
        raise ConfigError("result has no epochs to report")
    write_report(result, args.out if args.out else sys.stdout, fmt=args.format)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tiersim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-trace", help="generate a workload trace file")
    _add_common(p)
    p.add_argument("--out", required=True, help="trace path (.csv/.txt text, else binary)")
    p.set_defaults(func=_cmd_gen_trace)

    p = sub.add_parser("run", help="run one experiment")
    _add_common(p)
    _add_run_flags(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="run one experiment per axis value")
    _add_common(p)
    _add_run_flags(p)
    p.add_argument("--axis", required=True,
                   help="dotted config path, e.g. sketch.width or migration_interval_ms")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("report", help="convert a stored JSON result")
    p.add_argument("--in", dest="infile", required=True, help="JSON result from `run --format json`")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"tiersim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TraceIOError as exc:
        print(f"tiersim: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SimulationError as exc:
        print(f"tiersim: simulation error: {exc}", file=sys.stderr)
        return EXIT_SIMULATION


if __name__ == "__main__":
    sys.exit(main())
