"""Command-line entry point.

Verbs mirror the experiment kinds::

    lrdregress simulate   --config cfg.ini --out results/
    lrdregress table      --config cfg.ini --out results/
    lrdregress cv         --config cfg.ini --out results/
    lrdregress rates      --config cfg.ini --out results/
    lrdregress conditions --config cfg.ini --out results/

``--seed`` overrides the config seed. Exit codes: 0 success, 2 config or
validation error, 3 runtime failure, 4 I/O failure.
"""

import argparse
import sys
from dataclasses import replace

from .experiments import RUNNERS, emit_report, load_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_IO = 4


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lrdregress",
        description="Simulation harness for kernel regression under long-range dependence",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in RUNNERS:
        p = sub.add_parser(verb, help=f"run a {verb!r} experiment")
        p.add_argument("--config", required=True, help="path to the INI experiment config")
        p.add_argument("--out", default=None, help="output directory (default: config id)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if config.kind != args.verb:
            config = replace(config, kind=args.verb)
        if args.seed is not None:
            config = replace(config, seed=args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = args.out if args.out is not None else config.experiment_id
    try:
        report = RUNNERS[config.kind](config)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - surface category via exit code
        print(f"error: experiment failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        csv_path, summary_path = emit_report(report, out_dir)
    except OSError as exc:
        print(f"error: cannot write to {out_dir}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(csv_path)
    print(summary_path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
