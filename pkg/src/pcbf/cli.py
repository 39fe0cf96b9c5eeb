"""Command-line front end: simulate a scenario, sweep a parameter, or report
on a saved trace.

Exit codes: 0 success, 2 configuration error, 3 runtime error, 4 when any
constraint violation occurred (so CI can gate on clean runs).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, load_config
from .harness import ScenarioError, run_scenario, sweep_param
from .trace import read_trace, report_violations, write_trace

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_RUNTIME_ERROR = 3
EXIT_VIOLATION = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcbf",
        description="Closed-loop simulation of predictive barrier safety filters.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one scenario and write its trace")
    sim.add_argument("--config", required=True, help="scenario JSON file")
    sim.add_argument("--out", default=None, help="output directory (default: config or cwd)")
    sim.add_argument(
        "--seed", type=int, default=None,
        help="recorded in the run; reserved (scenarios are deterministic)",
    )

    swp = sub.add_parser("sweep", help="re-run a scenario across parameter values")
    swp.add_argument("--config", required=True, help="scenario JSON file")
    swp.add_argument("--param", required=True, help="dotted config path, e.g. filter.horizon")
    swp.add_argument("--values", required=True, help="comma-separated values")
    swp.add_argument("--out", default=None, help="output directory")

    rep = sub.add_parser("report", help="summarize violations in a saved trace")
    rep.add_argument("--trace", required=True, help="trace CSV file")
    return parser


def _parse_value(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _out_dir(arg, cfg) -> Path:
    path = Path(arg) if arg is not None else Path(cfg.output_dir or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _simulate(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    trace = run_scenario(cfg)
    out = _out_dir(args.out, cfg) / cfg.trace_name
    write_trace(trace, out)
    report = report_violations(trace)
    print(f"wrote {out} ({len(trace)} steps)")
    for line in report.summary_lines():
        print(line)
    return EXIT_VIOLATION if report.any else EXIT_OK


def _sweep(args) -> int:
    cfg = load_config(args.config)
    values = [_parse_value(v.strip()) for v in args.values.split(",") if v.strip()]
    if not values:
        raise ConfigError("sweep needs at least one value")
    out = _out_dir(args.out, cfg)
    any_violation = False
    stem = Path(cfg.trace_name).stem
    param_slug = args.param.replace(".", "_")
    for value, trace in sweep_param(cfg, args.param, values):
        name = f"{stem}_{param_slug}_{value}.csv"
        write_trace(trace, out / name)
        report = report_violations(trace)
        any_violation = any_violation or report.any
        print(f"{args.param}={value}: total violations {report.total} -> {out / name}")
    return EXIT_VIOLATION if any_violation else EXIT_OK


def _report(args) -> int:
    trace = read_trace(args.trace)
    report = report_violations(trace)
    print(f"{args.trace}: {len(trace)} steps")
    for line in report.summary_lines():
        print(line)
    return EXIT_VIOLATION if report.any else EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return _simulate(args)
        if args.command == "sweep":
            return _sweep(args)
        return _report(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except (ScenarioError, OSError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME_ERROR


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
