"""Command-line entry point.

Usage::

    mrgg simulate|estimate|sweep-delta2|test-power|linkpred \
        --config <file> --out <dir> [--seed N] [--jobs K]

Exit status: 0 on success, 1 on pipeline or statistical failure, 2 on input
errors. The MRGG_JOBS environment variable overrides --jobs.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .config import ConfigError, load_config
from .experiments import (
    cmd_estimate,
    cmd_linkpred,
    cmd_simulate,
    cmd_sweep_delta2,
    cmd_test_power,
)
from .pool import resolve_jobs

_COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "sweep-delta2": cmd_sweep_delta2,
    "test-power": cmd_test_power,
    "linkpred": cmd_linkpred,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mrgg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="JSON run configuration")
        cmd.add_argument("--out", required=True, help="output directory")
        cmd.add_argument("--seed", type=int, default=None, help="replace the config's seed list")
        cmd.add_argument("--jobs", type=int, default=1, help="worker processes (MRGG_JOBS overrides)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config = dataclasses.replace(config, seeds=(args.seed,))
        jobs = resolve_jobs(args.jobs)
    except (ConfigError, ValueError) as exc:
        print(f"mrgg: input error: {exc}", file=sys.stderr)
        return 2

    command = _COMMANDS[args.command]
    try:
        if args.command == "estimate":
            paths = command(config, args.out)
        else:
            paths = command(config, args.out, jobs=jobs)
    except ConfigError as exc:
        print(f"mrgg: input error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # estimation / statistical failures
        print(f"mrgg: {args.command} failed: {exc}", file=sys.stderr)
        return 1
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
