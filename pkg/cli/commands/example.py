import argparse
import logging
from pathlib import Path

from cli.middleware import handle_errors
from cli.options import add_output_arguments, run_config
from config.settings import settings
from modules.reports.schemas import ExampleSummary
from modules.reports.service import report_service
from modules.validation.schemas import ConstantParams, HeunParams
from modules.validation.service import validation_service

logger = logging.getLogger(__name__)

EXAMPLES = ("constant", "heun")


def register(subparsers) -> None:
    parser = subparsers.add_parser("example", help="Run a worked example against its oracle")
    parser.add_argument("name", help=f"One of: {', '.join(EXAMPLES)}")
    parser.add_argument("--n", type=int, default=None, help="Grid points")
    parser.add_argument("--rk4-steps", type=int, default=None, help="RK4 steps of the heun oracle")
    add_output_arguments(parser)
    parser.set_defaults(func=run)


@handle_errors
def run(args: argparse.Namespace) -> int:
    if args.name not in EXAMPLES:
        raise ValueError(f"Unknown example '{args.name}', expected one of: {', '.join(EXAMPLES)}")
    config = run_config(args, "example")

    overrides = {"n": args.n}
    if args.name == "constant":
        summary, table = validation_service.run_constant_example(ConstantParams(**_given(overrides)))
    else:
        overrides["rk4_steps"] = args.rk4_steps
        summary, table = validation_service.run_heun_example(HeunParams(**_given(overrides)))
        if not summary.passed:
            logger.warning(f"⚠️ Heun example deviates by {summary.relative_deviation:.3e} relative")

    out = Path(config.out)
    if config.wants("csv"):
        report_service.write_table(out, f"example_{args.name}.csv", table.header, table.rows)
    if config.wants("json"):
        result = ExampleSummary(name=args.name, summary=report_service.dump(summary), settings=settings.to_dict())
        report_service.write_report(out, result, name="summary.json")
    return 0


def _given(values: dict) -> dict:
    return {k: v for k, v in values.items() if v is not None}
