import argparse
from pathlib import Path

from cli.middleware import handle_errors
from cli.options import add_output_arguments, run_config
from core.exceptions import ConvergenceError, ProblemValidationError
from modules.kernel_dsl.service import kernel_dsl_service
from modules.reports.service import report_service
from modules.resolvents.service import resolvent_service


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "convergence", help="Per-order errors and bounds of the Neumann and resummed series"
    )
    parser.add_argument("--input", required=True, help="Problem file (.json, .yaml, .yml)")
    add_output_arguments(parser)
    parser.set_defaults(func=run)


@handle_errors
def run(args: argparse.Namespace) -> int:
    config = run_config(args, "convergence")
    problem = kernel_dsl_service.load_and_build(config.input)
    if problem.method != "both":
        raise ProblemValidationError(
            f"convergence compares both series and needs method \"both\", got '{problem.method}'", path="solver.method"
        )
    comparison = resolvent_service.compare_methods(
        problem.sum_kernel, problem.g, n_orders=problem.n_orders, order=problem.product_order
    )

    out = Path(config.out)
    if config.wants("csv"):
        table = report_service.convergence_table(comparison)
        report_service.write_table(out, "convergence.csv", table.header, table.rows, table.comments)
    converged = comparison.reference_report.converged
    summary = report_service.run_summary(
        "convergence", [comparison.resummed, comparison.neumann], problem=config.input, converged=converged
    )
    if config.wants("json"):
        report_service.write_report(out, summary)

    if not converged:
        raise ConvergenceError(
            f"Reference solution did not reach the stop rule; outputs written to {out}",
            partial=comparison.reference,
        )
    return 0
