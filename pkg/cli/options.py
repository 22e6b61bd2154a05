import argparse
import os
from pathlib import Path

from config.settings import settings
from modules.reports.schemas import RunConfig


def add_output_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default=None, help=f"Output directory (default {settings.OUTPUT_DIR})")
    parser.add_argument("--format", dest="formats", default="csv,json", help="Comma separated subset of csv,json")


def run_config(args: argparse.Namespace, subcommand: str) -> RunConfig:
    """RunConfig from parsed arguments, with the output directory created and checked"""
    config = RunConfig(
        subcommand=subcommand,
        input=getattr(args, "input", None),
        out=str(args.out or settings.OUTPUT_DIR),
        formats=args.formats,
        stride=getattr(args, "stride", 1),
    )
    directory = settings.ensure_output_directory(Path(config.out))
    if not os.access(directory, os.W_OK):
        raise ValueError(f"Output directory {directory} is not writable")
    return config
