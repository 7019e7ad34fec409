"""Command line entry point ``chgeo``.

Exit codes: 0 success, 1 scenario failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .config import parse_config
from .errors import ConfigError
from .record import PLOT_SERIES, emit_plot_data, from_ndjson
from .scenarios import run_scenario, scenario_failed, write_outputs
from .selftest import run_selftest

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


def _cmd_run(args) -> int:
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"chgeo: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        print(f"chgeo: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    record = run_scenario(cfg)
    ndjson_path, csv_path = write_outputs(record, cfg)
    print(f"{cfg.scenario}: {record.status} -> {ndjson_path}, {csv_path}")
    if record.message:
        print(f"  {record.message}")
    if scenario_failed(record):
        print(f"chgeo: scenario {cfg.scenario} failed", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def _cmd_plot(args) -> int:
    if args.series not in PLOT_SERIES:
        print(f"chgeo: unknown series {args.series!r}; choose from {', '.join(sorted(PLOT_SERIES))}", file=sys.stderr)
        return EXIT_USAGE
    try:
        record = from_ndjson(Path(args.record).read_text(encoding="utf-8"))
    except (OSError, ValueError, KeyError) as exc:
        print(f"chgeo: cannot read record: {exc}", file=sys.stderr)
        return EXIT_USAGE
    data = emit_plot_data(record, args.series)
    if args.output:
        Path(args.output).write_text(data, encoding="utf-8")
    else:
        sys.stdout.write(data)
    return EXIT_OK


def _cmd_selftest(args) -> int:
    failed = 0
    for name, ok, detail in run_selftest():
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failed += not ok
    return EXIT_FAILURE if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chgeo", description="Camassa-Holm geodesic lab")
    parser.add_argument("--version", action="version", version=f"chgeo {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario from a config file")
    run.add_argument("config")
    run.set_defaults(func=_cmd_run)

    plot = sub.add_parser("plot", help="emit long-format CSV (time,series,value) from a record")
    plot.add_argument("record")
    plot.add_argument("--series", required=True, help=f"one of {', '.join(sorted(PLOT_SERIES))}")
    plot.add_argument("-o", "--output", help="write here instead of stdout")
    plot.set_defaults(func=_cmd_plot)

    selftest = sub.add_parser("selftest", help="run the fast invariant checks")
    selftest.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
