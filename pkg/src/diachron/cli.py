"""Command-line entry point.

One JSON config drives every subcommand; stages read earlier artifacts
from the output directory, so `run` and stage-at-a-time execution give
byte-identical results. Exit codes: 0 success, 2 config error, 3 input
error, 4 numeric failure, 5 I/O error. Set DIACHRON_LOG to error, warn,
info, or debug to control logging.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys

from . import artifacts, syngen
from .errors import ConfigError, InputError, NumericError
from .corpus import save_corpus
from .pipeline import STAGES, load_config, run_pipeline, run_stage, with_overrides

LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def _add_pipeline_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", required=True, help="artifact directory")
    parser.add_argument("--threads", type=int, default=1, help="parallelism cap")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument(
        "--format", choices=["jsonl", "csv"], default=None, help="override input format"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diachron",
        description="Diachronic co-word clustering and term diffusion analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in STAGES:
        stage_parser = sub.add_parser(name, help=f"run the {name} stage")
        _add_pipeline_args(stage_parser)
    run_parser = sub.add_parser("run", help="run every stage in order")
    _add_pipeline_args(run_parser)
    syn = sub.add_parser("syngen", help="generate a synthetic corpus with ground truth")
    group = syn.add_mutually_exclusive_group(required=True)
    group.add_argument("--preset", help="named corpus shape")
    group.add_argument("--spec", help="JSON block specification file")
    syn.add_argument("--out", required=True, help="output directory")
    syn.add_argument("--seed", type=int, default=None, help="override spec seed")
    return parser


def _cmd_syngen(args) -> None:
    if args.preset:
        spec = syngen.preset(args.preset, seed=args.seed or 0)
    else:
        data = artifacts.read_json(args.spec)
        spec = syngen.spec_from_dict(data)
        if args.seed is not None:
            spec = dataclasses.replace(spec, seed=args.seed)
    records, truth = syngen.generate(spec)
    os.makedirs(args.out, exist_ok=True)
    save_corpus(records, os.path.join(args.out, artifacts.CORPUS), "jsonl")
    artifacts.write_json(truth, os.path.join(args.out, artifacts.TRUTH))
    logging.getLogger("diachron").info(
        "wrote %d records to %s", len(records), args.out
    )


def main(argv: list[str] | None = None) -> int:
    level = LOG_LEVELS.get(os.environ.get("DIACHRON_LOG", "warn").lower())
    if level is None:
        print(
            "diachron: error: DIACHRON_LOG must be one of error, warn, info, debug",
            file=sys.stderr,
        )
        return 2
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "syngen":
            _cmd_syngen(args)
        else:
            config = with_overrides(
                load_config(args.config), seed=args.seed, format=args.format
            )
            if args.threads < 1:
                raise ConfigError(f"--threads must be >= 1, got {args.threads}")
            if args.command == "run":
                run_pipeline(config, args.out, threads=args.threads)
            else:
                run_stage(args.command, config, args.out, threads=args.threads)
    except ConfigError as exc:
        print(f"diachron: config error: {exc}", file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"diachron: input error: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"diachron: numeric error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"diachron: i/o error: {exc}", file=sys.stderr)
        return 5
    return 0


if __name__ == "__main__":
    sys.exit(main())
