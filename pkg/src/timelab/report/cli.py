"""Command line entry point.

    timelab [--seed N] run <scenario.json> [--out DIR] [--format csv|json]
    timelab [--seed N] sweep <scenario.json> [--out DIR] [--format csv|json] [--workers N]
    timelab validate <scenario.json>

Exit status: 0 on success, 2 on a configuration error, 1 on any other
failure.
"""
import argparse
import logging
import sys

from .. import __version__
from ..errors import ConfigurationError, TimelabError
from . import config as cfg
from .export import FORMATS, export_results, format_float
from .runner import run_scenario, sweep

log = logging.getLogger("timelab")


def build_parser():
    parser = argparse.ArgumentParser(prog="timelab", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=None,
                        help="reserved; every current scenario is deterministic")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("run", "sweep"):
        p = sub.add_parser(name, help=f"{name} a scenario file")
        p.add_argument("scenario")
        p.add_argument("--out", default=None, help="output directory (default: no files)")
        p.add_argument("--format", choices=FORMATS, default="json")
        if name == "sweep":
            p.add_argument("--workers", type=int, default=None)
    p = sub.add_parser("validate", help="check a scenario against the schema")
    p.add_argument("scenario")
    return parser


def _print_summary(result, stream):
    for k, v in result.summary.items():
        value = format_float(v) if isinstance(v, float) else v
        print(f"{result.scenario_id}\t{k}\t{value}", file=stream)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "validate":
            config = cfg.load_config(args.scenario)
            if config["kind"] == "sweep":
                cfg.expand_sweep(config)
            print(f"{cfg.scenario_id(config)}: valid {config['kind']} scenario")
            return 0
        config = cfg.load_config(args.scenario)
        if args.command == "sweep" or config["kind"] == "sweep":
            if config["kind"] != "sweep":
                raise ConfigurationError("sweep command needs a sweep scenario", field="kind")
            result = sweep(config, workers=getattr(args, "workers", None))
            for member in result.results:
                _print_summary(member, sys.stdout)
        else:
            result = run_scenario(config)
            _print_summary(result, sys.stdout)
        if args.out:
            for path in export_results(result, args.out, args.format):
                log.info("wrote %s", path)
        return 0
    except ConfigurationError as exc:
        field = f" (field: {exc.field})" if exc.field else ""
        print(f"configuration error{field}: {exc}", file=sys.stderr)
        return 2
    except (TimelabError, OSError, ValueError, ArithmeticError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
