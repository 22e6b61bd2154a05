import argparse
import logging
from pathlib import Path

from cli.middleware import handle_errors
from cli.options import add_output_arguments, run_config
from core.exceptions import ConvergenceError
from modules.kernel_dsl.service import kernel_dsl_service
from modules.reports.service import report_service
from modules.resolvents.service import resolvent_service

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("solve", help="Solve a problem file and write solution.csv / report.json")
    parser.add_argument("--input", required=True, help="Problem file (.json, .yaml, .yml)")
    add_output_arguments(parser)
    parser.add_argument("--stride", type=int, default=1, help="Write every stride-th node pair")
    parser.set_defaults(func=run)


@handle_errors
def run(args: argparse.Namespace) -> int:
    config = run_config(args, "solve")
    problem = kernel_dsl_service.load_and_build(config.input)
    sk, g = problem.sum_kernel, problem.g
    plan = resolvent_service.prepare(sk, problem.product_order)

    methods = ["resummed", "neumann"] if problem.method == "both" else [problem.method]
    solution = None
    reports = []
    for method in methods:
        if method == "resummed":
            f, report = resolvent_service.solve_resummed(
                sk, g, n_orders=problem.n_orders, abs_tol=problem.abs_tol, rel_tol=problem.rel_tol, plan=plan
            )
        else:
            f, report = resolvent_service.solve_neumann(
                sk, g, n_orders=problem.n_orders, abs_tol=problem.abs_tol, rel_tol=problem.rel_tol
            )
        resolvent_service.convergence_bounds(sk, g, f, report, plan=plan)
        reports.append(report)
        if solution is None:
            solution = f

    out = Path(config.out)
    if config.wants("csv"):
        report_service.write_solution(out, solution, config.stride)
    summary = report_service.run_summary("solve", reports, problem=config.input)
    if config.wants("json"):
        report_service.write_report(out, summary)

    if not summary.converged:
        raise ConvergenceError(
            f"{', '.join(r.method for r in reports if not r.converged)} series did not reach the stop rule "
            f"within {problem.n_orders} orders; outputs written to {out}",
            partial=solution,
        )
    return 0
