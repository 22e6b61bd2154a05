import argparse
from pathlib import Path

from cli.middleware import EXIT_FAILED, handle_errors
from cli.options import add_output_arguments, run_config
from modules.kernel_dsl.service import kernel_dsl_service
from modules.reports.service import VERIFY_HEADER, VERIFY_POINTS, report_service


def register(subparsers) -> None:
    parser = subparsers.add_parser("verify", help="Run the invariant suite and write verify.json / verify.csv")
    parser.add_argument("--input", default=None, help="Problem file; the built-in cases are used when omitted")
    parser.add_argument("--n", type=int, default=VERIFY_POINTS, help="Grid points of the built-in cases")
    add_output_arguments(parser)
    parser.set_defaults(func=run)


@handle_errors
def run(args: argparse.Namespace) -> int:
    config = run_config(args, "verify")
    if config.input:
        problem = kernel_dsl_service.load_and_build(config.input)
        report = report_service.run_verify(
            [report_service.case_from_problem(problem)], n_points=problem.grid.n_points
        )
    else:
        if args.n < 2:
            raise ValueError(f"--n must be >= 2, got {args.n}")
        report = report_service.run_verify(n_points=args.n)

    out = Path(config.out)
    if config.wants("json"):
        report_service.write_report(out, report, name="verify.json")
    if config.wants("csv"):
        report_service.write_table(out, "verify.csv", VERIFY_HEADER, report_service.verify_rows(report))
    return 0 if report.passed else EXIT_FAILED
