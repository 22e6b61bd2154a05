"""
Output artifacts of a run: solution samples, solve reports, convergence
tables and the invariant verification suite.
"""
import logging
import math
from pathlib import Path
from typing import Any, Iterable, List, Optional

import numpy as np
from pydantic import BaseModel

from config.settings import settings
from core.tolerances import quadrature_tolerance
from modules.kernel_dsl.models import Problem
from modules.resolvents.models import SeparableComponent, SumKernel
from modules.resolvents.service import MethodComparison, ResolventService, resolvent_service
from modules.star_core.models import GeneralizedKernel, Grid
from modules.star_core.service import StarAlgebra, star_algebra
from modules.validation.service import ValidationService, validation_service
from utils.export import write_csv, write_json

from .models import ConvergenceTable, VerifyCase
from .schemas import RunSummary, VerifyCheck, VerifyReport

logger = logging.getLogger(__name__)

IDENTITY_ORDERS = (1, 2, 3)
BOUND_ORDERS = 7
VERIFY_POINTS = 401
VERIFY_HEADER = ["name", "problem", "status", "measured", "threshold", "slack", "detail"]


def _strip_timings(data: Any) -> Any:
    if isinstance(data, dict):
        return {k: _strip_timings(v) for k, v in data.items() if k != "timings"}
    if isinstance(data, list):
        return [_strip_timings(v) for v in data]
    return data


def _nan_if_none(value: Optional[float]) -> float:
    return float("nan") if value is None else value


class ReportService:
    def __init__(
        self,
        algebra: StarAlgebra = star_algebra,
        resolvents: ResolventService = resolvent_service,
        validation: ValidationService = validation_service,
    ):
        self.algebra = algebra
        self.resolvents = resolvents
        self.validation = validation

    # Writers

    def dump(self, model: Any) -> Any:
        """JSON-ready data; timings are dropped unless VOLTERRA_INCLUDE_TIMINGS is set"""
        data = model.model_dump() if isinstance(model, BaseModel) else model
        if settings.INCLUDE_TIMINGS:
            return data
        return _strip_timings(data)

    def write_solution(self, directory: Path, f: GeneralizedKernel, stride: int = 1) -> Path:
        c = complex(f.delta_coeff)
        comments = [f"delta_coeff_re={c.real:.16e}", f"delta_coeff_im={c.imag:.16e}"]
        path = write_csv(
            Path(directory) / "solution.csv",
            ["i", "j", "tp", "t", "re", "im"],
            self.algebra.field_rows(f, stride),
            comments,
        )
        logger.info(f"✅ Wrote {path}")
        return path

    def write_report(self, directory: Path, summary: BaseModel, name: str = "report.json") -> Path:
        path = write_json(Path(directory) / name, self.dump(summary))
        logger.info(f"✅ Wrote {path}")
        return path

    def write_table(self, directory: Path, name: str, header: List[str], rows: Iterable, comments=None) -> Path:
        path = write_csv(Path(directory) / name, header, rows, comments)
        logger.info(f"✅ Wrote {path}")
        return path

    def run_summary(
        self, subcommand: str, reports: List, problem: Optional[str] = None, converged: Optional[bool] = None
    ) -> RunSummary:
        if converged is None:
            converged = all(r.converged for r in reports)
        return RunSummary(
            subcommand=subcommand,
            problem=problem,
            converged=converged,
            reports=reports,
            settings=settings.to_dict(),
        )

    # Convergence table

    def convergence_table(self, comparison: MethodComparison) -> ConvergenceTable:
        """
        Per-order errors and bounds of both series against the shared reference.
        The resummed series may stop early (T = 0); its missing rows are nan.
        """
        resummed = comparison.resummed.orders
        neumann = comparison.neumann.orders
        rows = []
        for k in range(max(len(resummed), len(neumann))):
            r = resummed[k] if k < len(resummed) else None
            m = neumann[k] if k < len(neumann) else None
            rows.append([
                k,
                _nan_if_none(m.error if m else None),
                _nan_if_none(r.error if r else None),
                _nan_if_none(m.bound if m else None),
                _nan_if_none(r.bound if r else None),
            ])

        constants = comparison.resummed.constants
        comments = []
        if constants is not None:
            comments.append(
                f"C_K={constants.C_K:.16e} C_T={constants.C_T:.16e} C_f={constants.C_f:.16e} "
                f"c_f={constants.delta_coeff_f:.16e} length={constants.interval_length:.16e} "
                f"tau_q={constants.tau_q:.16e} eps_q={constants.eps_q:.16e}"
            )
        header = ["order", "neumann_error", "resummed_error", "bound_neumann", "bound_resummed"]
        return ConvergenceTable(header, rows, comments)

    # Verification suite

    def default_cases(self, n_points: int = VERIFY_POINTS) -> List[VerifyCase]:
        grid = Grid(0.0, 1.0, n_points)
        g = self.algebra.identity(grid)
        three = SumKernel(grid, (
            self.algebra.theta(grid),
            SeparableComponent(self.algebra.make_function(grid, grid.nodes), self.algebra.make_function(grid, 1.0)),
            self.algebra.make_kernel(grid, 0, lambda tp, t: np.sin(tp - t)),
        ))
        return [
            VerifyCase("constant_ab", self.validation.constant_sum_kernel(grid, 1.0, 2.0), g),
            VerifyCase("speedup", self.validation.constant_sum_kernel(grid, 1.0, 0.05), g),
            VerifyCase("three_component", three, g),
        ]

    def case_from_problem(self, problem: Problem) -> VerifyCase:
        name = Path(problem.source).stem if problem.source else "problem"
        return VerifyCase(name, problem.sum_kernel, problem.g, problem.product_order)

    def _gate(self, name: str, problem: str, measured: float, threshold: float, detail: str = "") -> VerifyCheck:
        passed = bool(measured <= threshold)
        return VerifyCheck(
            name=name,
            problem=problem,
            status="pass" if passed else "fail",
            measured=measured,
            threshold=threshold,
            slack=threshold - measured,
            detail=detail,
        )

    def _not_applicable(self, name: str, problem: str, detail: str) -> VerifyCheck:
        return VerifyCheck(name=name, problem=problem, status="n/a", detail=detail)

    def verify_case(self, case: VerifyCase) -> List[VerifyCheck]:
        sk, g = case.sum_kernel, case.g
        grid = sk.grid
        plan = self.resolvents.prepare(sk, case.product_order)
        reference, reference_report = self.resolvents.reference_solution(sk, g, plan=plan)

        C_K = self.algebra.sup_norm(sk.total())
        C_f = self.algebra.sup_norm(reference)
        tau = quadrature_tolerance(grid.h, grid.length, C_f, C_K)
        checks = []

        residual = max(
            self.resolvents.truncation_error_check(sk, g, n, reference=reference, plan=plan)
            for n in IDENTITY_ORDERS
        )
        detail = f"orders {list(IDENTITY_ORDERS)}"
        if not reference_report.converged:
            detail += ", reference not converged"
        checks.append(self._gate("truncation_identity", case.name, residual, 10 * tau, detail))

        if case.d < 2:
            checks.append(self._not_applicable("permutation_invariance", case.name, "single component"))
            checks.append(self._not_applicable("alternative_T", case.name, "single component"))
        else:
            reversed_order = list(reversed(plan.product_order))
            other, _ = self.resolvents.reference_solution(sk, g, order=reversed_order)
            checks.append(self._gate(
                "permutation_invariance", case.name, self.algebra.distance(reference, other), 10 * tau,
                f"orders {plan.product_order} vs {reversed_order}",
            ))
            alternative = self.resolvents.build_T_alternative(sk, plan.product_order)
            C_T = self.algebra.sup_norm(plan.T)
            tau_T = quadrature_tolerance(grid.h, grid.length, C_T, C_K)
            checks.append(self._gate(
                "alternative_T", case.name, self.algebra.distance(plan.T, alternative), 10 * tau_T,
                f"sup|T|={C_T:.6e}",
            ))

        for lemma in self.resolvents.lemma_checks(sk, plan):
            checks.append(VerifyCheck(
                name=f"lemma_bound[{lemma.index}]",
                problem=case.name,
                status="pass" if lemma.passed else "fail",
                measured=lemma.sup_resolvent,
                threshold=lemma.sup_resolvent + lemma.slack,
                slack=lemma.slack,
                detail=f"C exp(C|I|)={lemma.bound:.6e}",
            ))

        checks.extend(self._bound_checks(case, plan, reference))
        return checks

    def _bound_checks(self, case: VerifyCase, plan, reference: GeneralizedKernel) -> List[VerifyCheck]:
        sk, g = case.sum_kernel, case.g
        _, resummed = self.resolvents.solve_resummed(
            sk, g, n_orders=BOUND_ORDERS, abs_tol=0.0, rel_tol=0.0, track_defect=False, reference=reference, plan=plan
        )
        _, neumann = self.resolvents.solve_neumann(
            sk, g, n_orders=BOUND_ORDERS, abs_tol=0.0, rel_tol=0.0, track_defect=False, reference=reference
        )
        checks = []
        for report in (resummed, neumann):
            self.resolvents.convergence_bounds(sk, g, reference, report, plan=plan)
            eps = report.constants.eps_q
            excess = max(r.error - r.bound * (1.0 + eps) for r in report.orders)
            floor = 10.0 * self.resolvents.floor_tolerance(report.constants.C_f)
            checks.append(self._gate(
                f"series_bound[{report.method}]", case.name, excess, floor,
                f"max over orders 0..{len(report.orders) - 1} of error - bound",
            ))
        return checks

    def theta_power_check(self, n_points: int = VERIFY_POINTS) -> VerifyCheck:
        """Theta^{*k} against (t' - t)^{k-1}/(k-1)! on [0, 1]"""
        grid = Grid(0.0, 1.0, n_points)
        theta = self.algebra.theta(grid)
        delta = np.tril(grid.nodes[:, np.newaxis] - grid.nodes[np.newaxis, :])
        mask = np.tri(n_points, dtype=bool)

        worst = 0.0
        power = theta
        for k in range(1, settings.THETA_POWER_MAX_K + 1):
            if k > 1:
                power = self.algebra.star_product(theta, power)
            expected = np.where(mask, delta ** (k - 1) / math.factorial(k - 1), 0.0)
            worst = max(worst, float(np.max(np.abs(power.values - expected))))

        return self._gate(
            "theta_power", f"theta[n={n_points}]", worst, settings.THETA_POWER_TOL,
            f"k = 1..{settings.THETA_POWER_MAX_K}",
        )

    def verify_rows(self, report: VerifyReport) -> List[list]:
        """One CSV row per check; measurements of n/a checks stay empty"""
        return [[c.name, c.problem, c.status, c.measured, c.threshold, c.slack, c.detail] for c in report.checks]

    def run_verify(self, cases: Optional[List[VerifyCase]] = None, n_points: int = VERIFY_POINTS) -> VerifyReport:
        cases = cases if cases is not None else self.default_cases(n_points)
        checks = []
        for case in cases:
            logger.info(f"Verifying {case.name} (d={case.d}, {case.sum_kernel.grid})")
            checks.extend(self.verify_case(case))
        checks.append(self.theta_power_check(n_points))

        passed = all(c.status != "fail" for c in checks)
        for check in checks:
            if check.status == "fail":
                logger.error(f"❌ {check.name} on {check.problem}: {check.measured:.3e} > {check.threshold:.3e}")
        logger.info(f"{'✅' if passed else '❌'} Verify suite: {sum(c.status == 'pass' for c in checks)} passed, "
                    f"{sum(c.status == 'fail' for c in checks)} failed, {sum(c.status == 'n/a' for c in checks)} n/a")
        return VerifyReport(checks=checks, passed=passed, settings=settings.to_dict())


report_service = ReportService()
