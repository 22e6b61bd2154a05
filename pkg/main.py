import argparse
import logging
import sys
from typing import List, Optional

from config.settings import settings
from cli.commands import convergence, example, solve, verify


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="volterra",
        description=f"{settings.PROJECT_NAME} v{settings.VERSION}: Volterra equations of the second kind with sum kernels",
    )
    subparsers = parser.add_subparsers(dest="subcommand")
    for command in (solve, convergence, verify, example):
        command.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.subcommand is None:
        parser.print_help(sys.stderr)
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
