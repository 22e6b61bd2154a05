"""
Resolvents of sum kernels.

For K = K_1 + ... + K_d with known component resolvents R_i, the solution of
f = g + K*f is re-summed as

    f = sum_k T^{*k} * P * g,   P = R_{l_1} * ... * R_{l_d},   T = 1_* - P*(1_* - K)

where (l_1, ..., l_d) is the left-to-right product order (default d, ..., 1).
T is delta-free and is typically much smaller than K, so the series converges
faster than the ordinary Neumann series sum_k K^{*k} * g.
"""
import logging
import math
import time
from dataclasses import dataclass
from itertools import combinations
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import gammaln

from config.settings import settings
from core.exceptions import AlgebraInvariantError
from core.tolerances import quadrature_tolerance, relative_slack
from modules.star_core.models import GeneralizedKernel
from modules.star_core.service import StarAlgebra, star_algebra
from utils.validators import ensure_same_grid

from .models import (
    Component, NeumannResult, ResummationPlan, SeparableComponent, SumKernel,
    component_is_zero, component_kernel, component_kind,
)
from .schemas import ComponentInfo, ConvergenceConstants, LemmaCheck, OrderRecord, SolveReport

logger = logging.getLogger(__name__)


def series_bound(C_f: float, c_f: float, C: float, length: float, m: int) -> float:
    """
    (C_f + m|c_f|/|I|) (C|I|)^m / m!, the sup bound on the m-fold remainder.

    The m|c_f|/|I| term accounts for the delta part of f and vanishes for
    delta-free solutions.
    """
    if m == 0:
        return C_f
    x = C * length
    if x == 0:
        return 0.0
    scale = C_f + m * abs(c_f) / length
    return float(scale * np.exp(m * np.log(x) - gammaln(m + 1)))


@dataclass(frozen=True, eq=False)
class MethodComparison:
    reference: GeneralizedKernel
    reference_report: SolveReport
    resummed: SolveReport
    neumann: SolveReport


class ResolventService:
    def __init__(self, algebra: StarAlgebra = star_algebra):
        self.algebra = algebra

    # Component resolvents

    def resolvent_separable(self, comp: SeparableComponent) -> GeneralizedKernel:
        """Closed form R = 1_* + a(t') b(t) exp(alpha(t') - alpha(t)) Theta"""
        grid = comp.grid
        mask = np.tri(grid.n_points, dtype=bool)
        alpha = comp.alpha.samples
        exponent = np.where(mask, alpha[:, np.newaxis] - alpha[np.newaxis, :], 0)
        values = np.where(mask, np.outer(comp.a.samples, comp.b.samples) * np.exp(exponent), 0)
        return self.algebra.kernel(grid, 1, values)

    def resolvent_neumann(self, K: GeneralizedKernel, n_terms: int, tol: float) -> NeumannResult:
        """
        Partial sum 1_* + K + K^{*2} + ... stopped at the first term whose sup
        norm is <= tol, or after n_terms terms.
        """
        if K.delta_coeff != 0:
            raise ValueError("resolvent_neumann needs a delta-free kernel")
        if n_terms < 1:
            raise ValueError(f"n_terms must be >= 1, got {n_terms}")

        term = self.algebra.identity(K.grid, dtype=K.values.dtype)
        values = np.zeros_like(K.values)
        terms = 1
        last = 0.0
        converged = n_terms == 1 and self.algebra.sup_norm(K) <= tol

        for k in range(1, n_terms):
            term = self.algebra.star_product(K, term)
            values = values + term.values
            terms = k + 1
            last = self.algebra.sup_norm(term)
            logger.debug(f"Neumann term {k}: sup={last:.3e}")
            if last <= tol:
                converged = True
                break

        if not converged:
            logger.warning(f"⚠️ Neumann series not converged after {terms} terms (last term {last:.3e} > {tol:.1e})")
        return NeumannResult(self.algebra.kernel(K.grid, 1, values), terms, last, converged)

    def floor_tolerance(self, scale: float) -> float:
        return max(settings.ABS_TOL, settings.REL_TOL * scale)

    def resolve_component(self, index: int, component: Component) -> Tuple[GeneralizedKernel, ComponentInfo]:
        """Resolvent of one component plus how it was obtained"""
        kernel = component_kernel(component)
        kind = component_kind(component)
        C_K = self.algebra.sup_norm(kernel)

        if component_is_zero(component):
            resolvent = self.algebra.identity(kernel.grid, dtype=kernel.values.dtype)
            return resolvent, ComponentInfo(index=index, kind=kind, method="pruned", sup_norm=0.0)

        if isinstance(component, SeparableComponent):
            return self.resolvent_separable(component), ComponentInfo(
                index=index, kind=kind, method="closed_form", sup_norm=C_K
            )

        result = self.resolvent_neumann(kernel, settings.NEUMANN_MAX_TERMS, self.floor_tolerance(C_K))
        return result.kernel, ComponentInfo(
            index=index, kind=kind, method="neumann", sup_norm=C_K,
            terms=result.terms, converged=result.converged,
        )

    def component_resolvent(self, component: Component) -> GeneralizedKernel:
        resolvent, info = self.resolve_component(0, component)
        logger.debug(f"Component resolvent via {info.method}")
        return resolvent

    # T and its alternative form

    def _dtype(self, sk: SumKernel):
        return np.result_type(*(component_kernel(c).values.dtype for c in sk.components))

    def _clamp_delta(self, T: GeneralizedKernel) -> GeneralizedKernel:
        if abs(T.delta_coeff) > settings.DELTA_FLOOR:
            raise AlgebraInvariantError(
                f"T carries a delta coefficient {T.delta_coeff!r} above floor {settings.DELTA_FLOOR:g}"
            )
        return self.algebra.kernel(T.grid, 0, T.values)

    def prepare(self, sk: SumKernel, order: Optional[Sequence[int]] = None) -> ResummationPlan:
        """Component resolvents, their product P and T for one product order"""
        order = sk.normalize_order(order)
        resolved = [self.resolve_component(index, c) for index, c in enumerate(sk.components)]
        resolvents = [r for r, _ in resolved]
        infos = [info for _, info in resolved]

        active = set(sk.active_indices())
        factors = [resolvents[i] for i in order if i in active]
        dtype = self._dtype(sk)

        if factors:
            P = self.algebra.star_chain(*factors)
        else:
            P = self.algebra.identity(sk.grid, dtype=dtype)

        if len(factors) <= 1:
            T = self.algebra.zero(sk.grid, dtype=dtype)
        else:
            identity = self.algebra.identity(sk.grid, dtype=dtype)
            one_minus_K = self.algebra.subtract(identity, sk.total())
            T = self._clamp_delta(self.algebra.subtract(identity, self.algebra.star_product(P, one_minus_K)))

        logger.debug(f"Prepared T for order {order}: {len(factors)} active of {sk.d}, sup|T|={self.algebra.sup_norm(T):.3e}")
        return ResummationPlan(sk, order, P, T, infos, resolvents)

    def build_T(self, sk: SumKernel, order: Optional[Sequence[int]] = None) -> GeneralizedKernel:
        """T = 1_* - P*(1_* - K)"""
        return self.prepare(sk, order).T

    def build_T_alternative(self, sk: SumKernel, order: Optional[Sequence[int]] = None) -> GeneralizedKernel:
        """
        T = P * sum_{n>=2} (-1)^n sum_{i_1<...<i_n} K_{i_1}*...*K_{i_n}

        Indices are ordered along the inverse of P, i.e. the product order
        reversed, so the result matches build_T for the same order.
        """
        if sk.d < 2:
            raise ValueError("build_T_alternative needs at least two components")
        plan = self.prepare(sk, order)
        active = set(sk.active_indices())
        sequence = [i for i in reversed(plan.product_order) if i in active]
        if len(sequence) < 2:
            return self.algebra.zero(sk.grid, dtype=self._dtype(sk))

        kernels = {i: component_kernel(sk.components[i]) for i in sequence}
        series = None
        for n in range(2, len(sequence) + 1):
            sign = 1 if n % 2 == 0 else -1
            for subset in combinations(sequence, n):
                product = self.algebra.scale(self.algebra.star_chain(*(kernels[i] for i in subset)), sign)
                series = product if series is None else self.algebra.add(series, product)

        return self._clamp_delta(self.algebra.star_product(plan.resolvent_product, series))

    # Series solvers

    def defect(self, K: GeneralizedKernel, g: GeneralizedKernel, f: GeneralizedKernel) -> float:
        """sup |f - g - K*f|"""
        return self.algebra.distance(f, self.algebra.add(g, self.algebra.star_product(K, f)))

    def _run_series(
        self,
        method: str,
        step: GeneralizedKernel,
        base: GeneralizedKernel,
        g: GeneralizedKernel,
        K: GeneralizedKernel,
        n_orders: int,
        abs_tol: float,
        rel_tol: float,
        track_defect: bool,
        reference: Optional[GeneralizedKernel],
    ) -> Tuple[GeneralizedKernel, SolveReport]:
        if n_orders < 1:
            raise ValueError(f"n_orders must be >= 1, got {n_orders}")

        step_is_zero = not np.any(step.values) and step.delta_coeff == 0
        records: List[OrderRecord] = []
        term = base
        f = base
        converged = False

        for k in range(n_orders):
            if k > 0:
                term = self.algebra.star_product(step, term)
                f = self.algebra.add(f, term)
            term_norm = self.algebra.sup_norm(term)
            record = OrderRecord(order=k, term_norm=term_norm)
            if track_defect:
                record.defect = self.defect(K, g, f)
            if reference is not None:
                record.error = self.algebra.sup_norm(self.algebra.subtract(reference, f))
            records.append(record)
            logger.debug(f"{method} order {k}: term={term_norm:.3e} defect={record.defect}")

            threshold = max(abs_tol, rel_tol * self.algebra.sup_norm(f))
            if step_is_zero or (k > 0 and term_norm <= threshold):
                converged = True
                break

        if records[-1].defect is None:
            records[-1].defect = self.defect(K, g, f)

        tau = quadrature_tolerance(K.grid.h, K.grid.length, self.algebra.sup_norm(f), self.algebra.sup_norm(K))
        defects = [r.defect for r in records if r.defect is not None]
        stagnated = (
            len(defects) >= 2 and defects[-1] > tau and defects[-1] > 0.9 * defects[-2]
        )
        if stagnated:
            logger.warning(f"⚠️ {method} defect stagnates at {defects[-1]:.3e} (tau_q={tau:.1e})")

        report = SolveReport(
            method=method,
            n_orders=n_orders,
            orders_computed=len(records),
            converged=converged,
            stagnated=stagnated,
            orders=records,
        )
        return f, report

    def _tolerances(self, abs_tol: Optional[float], rel_tol: Optional[float]) -> Tuple[float, float]:
        return (
            settings.ABS_TOL if abs_tol is None else abs_tol,
            settings.REL_TOL if rel_tol is None else rel_tol,
        )

    def solve_resummed(
        self,
        sk: SumKernel,
        g: GeneralizedKernel,
        n_orders: Optional[int] = None,
        order: Optional[Sequence[int]] = None,
        abs_tol: Optional[float] = None,
        rel_tol: Optional[float] = None,
        track_defect: bool = True,
        reference: Optional[GeneralizedKernel] = None,
        plan: Optional[ResummationPlan] = None,
    ) -> Tuple[GeneralizedKernel, SolveReport]:
        """f^(n-1) = sum_{k<n} T^{*k} * P * g with per-order diagnostics"""
        ensure_same_grid(sk.grid, g.grid)
        n_orders = n_orders or settings.DEFAULT_ORDERS
        abs_tol, rel_tol = self._tolerances(abs_tol, rel_tol)

        started = time.perf_counter()
        plan = plan or self.prepare(sk, order)
        prepared = time.perf_counter()

        base = self.algebra.star_product(plan.resolvent_product, g)
        f, report = self._run_series(
            "resummed", plan.T, base, g, sk.total(), n_orders, abs_tol, rel_tol, track_defect, reference
        )
        report.product_order = list(plan.product_order)
        report.components = list(plan.components)
        report.converged = report.converged and all(c.converged for c in plan.components)
        report.timings = {"prepare": prepared - started, "series": time.perf_counter() - prepared}

        logger.info(
            f"{'✅' if report.converged else '⚠️'} Resummed solve: {report.orders_computed} orders, "
            f"final defect {report.orders[-1].defect:.3e}"
        )
        return f, report

    def solve_neumann(
        self,
        kernel: Union[SumKernel, GeneralizedKernel],
        g: GeneralizedKernel,
        n_orders: Optional[int] = None,
        abs_tol: Optional[float] = None,
        rel_tol: Optional[float] = None,
        track_defect: bool = True,
        reference: Optional[GeneralizedKernel] = None,
    ) -> Tuple[GeneralizedKernel, SolveReport]:
        """f_N^(n-1) = sum_{k<n} K^{*k} * g"""
        K = kernel.total() if isinstance(kernel, SumKernel) else kernel
        ensure_same_grid(K.grid, g.grid)
        n_orders = n_orders or settings.DEFAULT_ORDERS
        abs_tol, rel_tol = self._tolerances(abs_tol, rel_tol)

        started = time.perf_counter()
        f, report = self._run_series("neumann", K, g, g, K, n_orders, abs_tol, rel_tol, track_defect, reference)
        report.timings = {"series": time.perf_counter() - started}

        logger.info(
            f"{'✅' if report.converged else '⚠️'} Neumann solve: {report.orders_computed} orders, "
            f"final defect {report.orders[-1].defect:.3e}"
        )
        return f, report

    def solve_separable(self, comp: SeparableComponent, g: GeneralizedKernel) -> GeneralizedKernel:
        """f = g + a(t') int b(tau) exp(alpha(t') - alpha(tau)) g(tau, t) dtau"""
        return self.algebra.star_product(self.resolvent_separable(comp), g)

    def reference_solution(
        self,
        sk: SumKernel,
        g: GeneralizedKernel,
        plan: Optional[ResummationPlan] = None,
        order: Optional[Sequence[int]] = None,
    ) -> Tuple[GeneralizedKernel, SolveReport]:
        """Resummed series run to the stop rule"""
        f, report = self.solve_resummed(
            sk, g, n_orders=settings.NEUMANN_MAX_TERMS, order=order, track_defect=False, plan=plan
        )
        if not report.converged:
            logger.warning("⚠️ Reference solution did not reach the stop rule")
        return f, report

    # Error accounting

    def propagate(self, step: GeneralizedKernel, f: GeneralizedKernel, n: int) -> GeneralizedKernel:
        """step*(step*(...*(step*f))) with n factors"""
        for _ in range(n):
            f = self.algebra.star_product(step, f)
        return f

    def truncation_error_check(
        self,
        sk: SumKernel,
        g: GeneralizedKernel,
        n: int,
        reference: Optional[GeneralizedKernel] = None,
        plan: Optional[ResummationPlan] = None,
        order: Optional[Sequence[int]] = None,
    ) -> float:
        """sup |(f - f^(n-1)) - T^{*n}*f|"""
        plan = plan or self.prepare(sk, order)
        f = reference if reference is not None else self.reference_solution(sk, g, plan=plan)[0]
        approx, _ = self.solve_resummed(sk, g, n_orders=n, abs_tol=0.0, rel_tol=0.0, track_defect=False, plan=plan)
        remainder = self.algebra.subtract(f, approx)
        return self.algebra.distance(remainder, self.propagate(plan.T, f, n))

    def neumann_truncation_check(
        self,
        sk: SumKernel,
        g: GeneralizedKernel,
        n: int,
        reference: GeneralizedKernel,
    ) -> float:
        """sup |(f - f_N^(n-1)) - K^{*n}*f|"""
        K = sk.total()
        approx, _ = self.solve_neumann(K, g, n_orders=n, abs_tol=0.0, rel_tol=0.0, track_defect=False)
        remainder = self.algebra.subtract(reference, approx)
        return self.algebra.distance(remainder, self.propagate(K, reference, n))

    def lemma_checks(self, sk: SumKernel, plan: Optional[ResummationPlan] = None) -> List[LemmaCheck]:
        """sup|R_i - 1_*| <= C_{K_i} exp(C_{K_i}|I|) for every component"""
        plan = plan or self.prepare(sk)
        grid = sk.grid
        checks = []
        for index, (component, resolvent) in enumerate(zip(sk.components, plan.component_resolvents)):
            C = self.algebra.sup_norm(component_kernel(component))
            bound = C * math.exp(C * grid.length)
            allowed = bound * (1.0 + relative_slack(grid.h, grid.length, C))
            sup_resolvent = self.algebra.sup_norm(resolvent)
            checks.append(LemmaCheck(
                index=index,
                sup_resolvent=sup_resolvent,
                bound=bound,
                slack=allowed - sup_resolvent,
                passed=sup_resolvent <= allowed,
            ))
        return checks

    def convergence_bounds(
        self,
        sk: SumKernel,
        g: GeneralizedKernel,
        f: GeneralizedKernel,
        report: SolveReport,
        plan: Optional[ResummationPlan] = None,
    ) -> SolveReport:
        """
        Fill constants, per-order bounds and the component resolvent bound checks.

        Order n of the report is the approximant f^(n); its remainder is the
        (n+1)-fold product, bounded by series_bound(..., m=n+1). C is C_T for
        the resummed series and C_K for the Neumann series.
        """
        plan = plan or self.prepare(sk, report.product_order or None)
        grid = sk.grid
        length = grid.length
        C_K = self.algebra.sup_norm(sk.total())
        C_T = self.algebra.sup_norm(plan.T)
        C_f = self.algebra.sup_norm(f)
        c_f = abs(f.delta_coeff)

        constants = ConvergenceConstants(
            C_K=C_K,
            C_T=C_T,
            C_f=C_f,
            delta_coeff_f=c_f,
            interval_length=length,
            tau_q=quadrature_tolerance(grid.h, length, C_f, C_K),
            eps_q=relative_slack(grid.h, length, C_K),
        )

        C = C_T if report.method == "resummed" else C_K
        floor = 10.0 * self.floor_tolerance(C_f)
        holds = True
        for record in report.orders:
            record.bound = series_bound(C_f, c_f, C, length, record.order + 1)
            if record.error is not None:
                ok = record.error <= record.bound * (1.0 + constants.eps_q) + floor
                holds = holds and ok

        report.constants = constants
        report.bounds_hold = holds
        report.lemma_checks = self.lemma_checks(sk, plan)
        if not holds:
            logger.warning(f"⚠️ {report.method} errors exceed the series bound")
        return report

    def compare_methods(
        self,
        sk: SumKernel,
        g: GeneralizedKernel,
        n_orders: int,
        order: Optional[Sequence[int]] = None,
        identity_orders: int = 0,
    ) -> MethodComparison:
        """
        Run both series against one converged reference, with errors, bounds and
        the truncation identity residual for the first `identity_orders` orders.
        """
        plan = self.prepare(sk, order)
        reference, reference_report = self.reference_solution(sk, g, plan=plan)

        _, resummed = self.solve_resummed(sk, g, n_orders=n_orders, abs_tol=0.0, rel_tol=0.0, reference=reference, plan=plan)
        _, neumann = self.solve_neumann(sk, g, n_orders=n_orders, abs_tol=0.0, rel_tol=0.0, reference=reference)
        self.convergence_bounds(sk, g, reference, resummed, plan=plan)
        self.convergence_bounds(sk, g, reference, neumann, plan=plan)

        for record in resummed.orders[:identity_orders]:
            record.identity_residual = self.truncation_error_check(sk, g, record.order + 1, reference=reference, plan=plan)
        for record in neumann.orders[:identity_orders]:
            record.identity_residual = self.neumann_truncation_check(sk, g, record.order + 1, reference)

        return MethodComparison(reference, reference_report, resummed, neumann)


resolvent_service = ResolventService()
