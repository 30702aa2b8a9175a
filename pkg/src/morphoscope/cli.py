"""Command line interface.

morphoscope <command> --config FILE [options]

Commands: validate, analyze, symbol, rate, weingarten, twistor, catalog.
Reports are written as JSON always; scan commands also write a CSV table.
Exit code 0 means every check passed, 1 means at least one check failed
with its numeric evidence in the report, 2 means the configuration or the
requested domain operation was invalid.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import runner
from .config import ScenarioConfig, build_scenario
from .errors import ConfigError, MorphoscopeError
from .report import exit_code, verdict_lines, write_csv, write_json

SCAN_COMMANDS = {"validate", "rate", "twistor"}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="morphoscope",
        description="chart-level analysis of horizontally conformal maps")
    p.add_argument("command",
                   choices=["validate", "analyze", "symbol", "rate",
                            "weingarten", "twistor", "catalog"])
    p.add_argument("--config", help="path to a scenario config JSON file")
    p.add_argument("--point", help="chart point as x1,x2,x3,x4")
    p.add_argument("--patch", help="built-in surface patch name (twistor)")
    p.add_argument("--scan", action="store_true",
                   help="run the annulus scan instead of a point report "
                        "(weingarten)")
    p.add_argument("--out", default=".", help="directory for report files")
    p.add_argument("--format", choices=["json", "csv"], default="json",
                   help="csv additionally writes the record table for "
                        "non-scan commands")
    p.add_argument("--seed", type=int, default=None,
                   help="override the config seed")
    p.add_argument("--fd-step", type=float, default=None,
                   help="override the finite difference step")
    p.add_argument("--workers", type=int, default=None,
                   help="override the worker count")
    return p


def _parse_point(text: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 4:
        raise ConfigError("--point expects four comma-separated numbers")
    try:
        return np.array([float(v) for v in parts])
    except ValueError as exc:
        raise ConfigError(f"--point: {exc}") from exc


def _dispatch(args, config, scenario, seed, workers):
    if args.command == "validate":
        return runner.run_validate(config, scenario, seed, workers)
    if args.command == "analyze":
        if args.point is None:
            raise ConfigError("analyze requires --point")
        return runner.run_analyze(config, scenario, _parse_point(args.point),
                                  seed, workers)
    if args.command == "symbol":
        return runner.run_symbol(config, scenario, seed, workers)
    if args.command == "rate":
        return runner.run_rate(config, scenario, seed, workers)
    if args.command == "weingarten":
        if args.scan:
            point = _parse_point(args.point) if args.point else None
            return runner.run_weingarten_scan(config, scenario, point,
                                              seed, workers)
        if args.point is None:
            raise ConfigError("weingarten requires --point or --scan")
        return runner.run_weingarten_point(
            config, scenario, _parse_point(args.point), seed, workers)
    if args.command == "twistor":
        if args.patch is None:
            raise ConfigError("twistor requires --patch")
        return runner.run_twistor(config, scenario, args.patch, seed, workers)
    raise ConfigError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    out_dir = Path(args.out)
    try:
        if args.command == "catalog":
            report, table = runner.run_catalog(args.seed or 0,
                                               args.workers or 1)
            stem = "catalog"
            config = None
        else:
            if args.config is None:
                raise ConfigError(f"{args.command} requires --config")
            config = ScenarioConfig.from_file(args.config)
            if args.seed is not None:
                config.analysis["seed"] = args.seed
            if args.fd_step is not None:
                config.analysis["fd_step"] = args.fd_step
            if args.workers is not None:
                config.analysis["workers"] = args.workers
            seed = config.analysis["seed"]
            workers = config.analysis["workers"]
            scenario = build_scenario(config)
            report, table = _dispatch(args, config, scenario, seed, workers)
            stem = f"{config.name}_{args.command}"
            if args.command == "weingarten":
                stem += "_scan" if args.scan else "_point"
            if args.command == "twistor":
                stem += f"_{args.patch}"
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MorphoscopeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2

    json_path = write_json(report, out_dir / f"{stem}.json")
    for line in verdict_lines(report["checks"]):
        print(line)
    print(f"report: {json_path}")
    wants_csv = (args.command in SCAN_COMMANDS
                 or (args.command == "weingarten" and args.scan)
                 or args.format == "csv")
    if table is not None and wants_csv:
        rows, fields = table
        csv_path = write_csv(rows, fields, out_dir / f"{stem}.csv")
        print(f"table: {csv_path}")
    return exit_code(report["checks"])


if __name__ == "__main__":
    sys.exit(main())
