"""Command-line entry point.

    qrc generate|features|train|evaluate|run-all --config <path>
        [--limit M] [--workers W] [--kind single|two]

Progress goes to stderr; data artifacts only to files. Exit codes:
0 success, 1 usage/config error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import ConfigError, QrcError
from .pipeline import (
    cmd_evaluate,
    cmd_features,
    cmd_generate,
    cmd_run_all,
    cmd_train,
    load_config,
)

COMMANDS = ("generate", "features", "train", "evaluate", "run-all")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qrc",
        description="Speckle ground-state energy prediction with a spin reservoir",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="JSON run configuration")
        cmd.add_argument("--limit", type=int, default=None, metavar="M",
                         help="operate on the first M instances only")
        cmd.add_argument("--workers", type=int, default=None, metavar="W",
                         help="override the configured worker count")
        if name in ("train", "evaluate"):
            cmd.add_argument("--kind", choices=("single", "two"), default=None,
                             help="readout kind (default: every configured kind)")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s"
    )
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exit_request:
        return 0 if exit_request.code in (0, None) else 1
    try:
        config = load_config(args.config)
        if args.limit is not None and args.limit < 1:
            raise ConfigError("--limit must be at least 1")
        if args.command == "generate":
            cmd_generate(config, limit=args.limit)
        elif args.command == "features":
            cmd_features(config, limit=args.limit, workers=args.workers)
        elif args.command in ("train", "evaluate"):
            kinds = (args.kind,) if args.kind else config.kinds
            action = cmd_train if args.command == "train" else cmd_evaluate
            for kind in kinds:
                action(config, kind, limit=args.limit)
        else:
            cmd_run_all(config, limit=args.limit, workers=args.workers)
    except OSError as io_error:
        logging.getLogger("qrc").error("%s", io_error)
        return 2
    except QrcError as failure:
        logging.getLogger("qrc").error("%s", failure)
        return failure.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
