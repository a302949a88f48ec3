#!/usr/bin/env python3

import argparse
import logging
import sys

from coopmac import __version__
from coopmac.config import ConfigError, OutputFormat, load_config
from coopmac.polytope import RowLimitExceeded
from coopmac.run import EXIT_CONFIG, EXIT_ROW_LIMIT, run

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


def create_parser():
    parser = argparse.ArgumentParser(
        description="Rate regions of the half-duplex cooperative multiple-access channel.",
        epilog="Modes and their parameters are read from the config document.",
    )

    parser.add_argument(
        "--config",
        "-c",
        required=True,
        help="YAML run configuration.",
    )
    parser.add_argument(
        "--out",
        "-o",
        default=None,
        help="Output file; defaults to the config's output.path or coopmac-<mode>.<format>.",
    )
    parser.add_argument(
        "--format",
        "-f",
        type=OutputFormat,
        choices=list(OutputFormat),
        default=None,
        help="Output format, csv or json.",
    )
    parser.add_argument(
        "--threads",
        "-j",
        type=int,
        default=None,
        help="Worker threads for the grid search.",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="Seed for the randomized parameter samples of fme-verify.",
    )
    parser.add_argument(
        "--debug", "-d", help="Log debugging information.", action="store_true"
    )
    parser.add_argument("--version", action="version", version=__version__)

    return parser


def main():  # pragma: no cover
    parser = create_parser()
    args = parser.parse_args()
    if args.debug:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        config = load_config(
            args.config,
            out=args.out,
            output_format=args.format,
            threads=args.threads,
            seed=args.seed,
        )
        result = run(config)
    except RowLimitExceeded as e:
        logger.error(str(e))
        sys.exit(EXIT_ROW_LIMIT)
    except (ConfigError, ValueError) as e:
        logger.error(str(e))
        sys.exit(EXIT_CONFIG)

    for path in result.artifacts:
        print(path)
    if result.verdict is not None:
        logger.info(f"Verdict: {result.verdict}")
    sys.exit(result.exit_code)


if __name__ == "__main__":  # pragma: no cover
    main()
