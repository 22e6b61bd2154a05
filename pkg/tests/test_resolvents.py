import math

import numpy as np
import pytest

from core.tolerances import quadrature_tolerance
from modules.resolvents.models import SeparableComponent, SumKernel
from modules.resolvents.service import series_bound
from modules.star_core.models import Grid
from modules.validation.service import validation_service


def column_at(f, i, j=0):
    return complex(f.values[i, j]).real


class TestSumKernel:
    def test_requires_components(self, unit_grid):
        with pytest.raises(ValueError):
            SumKernel(unit_grid, ())

    def test_rejects_delta_components(self, algebra, unit_grid):
        with pytest.raises(ValueError):
            SumKernel(unit_grid, (algebra.identity(unit_grid),))

    def test_rejects_grid_mismatch(self, algebra, unit_grid):
        with pytest.raises(ValueError):
            SumKernel(unit_grid, (algebra.theta(Grid(0.0, 1.0, 11)),))

    def test_uniform_split(self, algebra, unit_grid):
        K = algebra.theta(unit_grid, 3.0)
        sk = SumKernel.uniform_split(K, 3)
        assert sk.d == 3
        assert algebra.distance(sk.total(), K) < 1e-15
        with pytest.raises(ValueError):
            SumKernel.uniform_split(K, 0)

    def test_default_order_and_normalization(self, constant_ab):
        assert constant_ab.default_order() == [1, 0]
        assert constant_ab.normalize_order([0, 1]) == [0, 1]
        with pytest.raises(ValueError):
            constant_ab.normalize_order([0, 0])


class TestComponentResolvents:
    def test_separable_constant_closed_form(self, algebra, resolvents, unit_grid):
        comp = SeparableComponent(algebra.make_function(unit_grid, 2.0), algebra.make_function(unit_grid, 1.0))
        R = resolvents.resolvent_separable(comp)
        assert R.delta_coeff == 1
        delta = unit_grid.nodes[:, np.newaxis] - unit_grid.nodes[np.newaxis, :]
        expected = np.tril(2.0 * np.exp(2.0 * delta))
        np.testing.assert_allclose(R.values, expected, rtol=1e-12)

    def test_separable_matches_neumann(self, algebra, resolvents):
        grid = Grid(0.0, 1.0, 201)
        comp = SeparableComponent(algebra.make_function(grid, grid.nodes), algebra.make_function(grid, 1.0))
        closed = resolvents.resolvent_separable(comp)
        result = resolvents.resolvent_neumann(comp.to_kernel(), 200, 1e-14)
        assert result.converged
        assert algebra.distance(closed, result.kernel) < 5e-4

    @pytest.mark.slow
    def test_separable_matches_neumann_acceptance_grid(self, algebra, resolvents):
        grid = Grid(0.0, 1.0, 801)
        comp = SeparableComponent(algebra.make_function(grid, grid.nodes), algebra.make_function(grid, 1.0))
        closed = resolvents.resolvent_separable(comp)
        result = resolvents.resolvent_neumann(comp.to_kernel(), 200, 1e-14)
        assert algebra.distance(closed, result.kernel) < 1e-5

    def test_neumann_resolvent_satisfies_resolvent_equation(self, algebra, resolvents, unit_grid):
        K = algebra.make_kernel(unit_grid, 0, lambda tp, t: np.sin(tp - t) + tp)
        R = resolvents.resolvent_neumann(K, 200, 1e-14).kernel
        lhs = algebra.subtract(R, algebra.identity(unit_grid))
        assert algebra.distance(lhs, algebra.star_product(K, R)) < 1e-10

    def test_neumann_reports_non_convergence(self, algebra, resolvents, unit_grid):
        result = resolvents.resolvent_neumann(algebra.theta(unit_grid, 5.0), 3, 1e-14)
        assert not result.converged
        assert result.terms == 3

    def test_neumann_rejects_delta(self, algebra, resolvents, unit_grid):
        with pytest.raises(ValueError):
            resolvents.resolvent_neumann(algebra.identity(unit_grid), 10, 1e-12)

    @pytest.mark.parametrize("c", [0.5, 1.0, 3.0])
    def test_lemma_bound_saturated_by_constant_kernel(self, algebra, resolvents, unit_grid, c):
        separable = SeparableComponent(algebra.make_function(unit_grid, c), algebra.make_function(unit_grid, 1.0))
        check, = resolvents.lemma_checks(SumKernel.of(separable))
        assert check.passed
        assert check.sup_resolvent == pytest.approx(c * math.exp(c), rel=1e-10)

        numeric, = resolvents.lemma_checks(SumKernel.of(algebra.theta(unit_grid, c)))
        assert numeric.passed
        assert numeric.sup_resolvent == pytest.approx(c * math.exp(c), rel=1e-3)


class TestT:
    def test_single_component_gives_zero_T(self, algebra, resolvents, unit_grid):
        plan = resolvents.prepare(SumKernel.of(algebra.theta(unit_grid, 2.0)))
        assert plan.T_is_zero
        assert plan.T.delta_coeff == 0

    def test_zero_components_are_pruned(self, algebra, resolvents, unit_grid):
        sk = SumKernel.of(algebra.zero(unit_grid), algebra.theta(unit_grid, 2.0))
        plan = resolvents.prepare(sk)
        assert [c.method for c in plan.components] == ["pruned", "neumann"]
        assert plan.T_is_zero

    def test_T_is_delta_free(self, resolvents, constant_ab):
        assert resolvents.build_T(constant_ab).delta_coeff == 0

    def test_T_matches_closed_form(self, algebra, resolvents):
        grid = Grid(0.0, 1.0, 201)
        sk = validation_service.constant_sum_kernel(grid, 1.0, 2.0)
        T = resolvents.build_T(sk)
        expected = validation_service.constant_T(1.0, 2.0, grid.nodes)
        np.testing.assert_allclose(T.values[:, 0], expected, atol=1e-3)

    def test_speedup_regime_constants(self, algebra, resolvents):
        grid = Grid(0.0, 1.0, 201)
        sk = validation_service.constant_sum_kernel(grid, 1.0, 0.05)
        C_T = algebra.sup_norm(resolvents.build_T(sk))
        C_K = algebra.sup_norm(sk.total())
        assert C_K == pytest.approx(1.05)
        assert C_T == pytest.approx(0.0877, abs=1e-3)
        assert C_T < C_K

    def test_alternative_T_two_components(self, algebra, resolvents, constant_ab):
        T = resolvents.build_T(constant_ab)
        alternative = resolvents.build_T_alternative(constant_ab)
        grid = constant_ab.grid
        tau = quadrature_tolerance(grid.h, grid.length, algebra.sup_norm(T), 3.0)
        assert algebra.distance(T, alternative) <= 10 * tau

    def test_alternative_T_three_components(self, algebra, resolvents, three_component):
        T = resolvents.build_T(three_component, [0, 2, 1])
        alternative = resolvents.build_T_alternative(three_component, [0, 2, 1])
        grid = three_component.grid
        C_K = algebra.sup_norm(three_component.total())
        tau = quadrature_tolerance(grid.h, grid.length, algebra.sup_norm(T), C_K)
        assert algebra.distance(T, alternative) <= 10 * tau

    def test_alternative_T_needs_two_components(self, algebra, resolvents, unit_grid):
        with pytest.raises(ValueError):
            resolvents.build_T_alternative(SumKernel.of(algebra.theta(unit_grid)))


class TestSeriesSolvers:
    def test_order_zero_constant_example(self, algebra, resolvents):
        grid = Grid(0.0, 1.0, 201)
        sk = validation_service.constant_sum_kernel(grid, 1.0, 2.0)
        f0, report = resolvents.solve_resummed(sk, algebra.identity(grid), n_orders=1)
        assert report.orders_computed == 1
        assert column_at(f0, 200) == pytest.approx(4 * math.e ** 2 - math.e, rel=1e-4)

    def test_converged_constant_example(self, algebra, resolvents):
        grid = Grid(0.0, 1.0, 201)
        sk = validation_service.constant_sum_kernel(grid, 1.0, 2.0)
        f, report = resolvents.solve_resummed(sk, algebra.identity(grid), n_orders=60)
        assert report.converged
        assert f.delta_coeff == 1
        assert column_at(f, 200) == pytest.approx(3 * math.e ** 3, rel=1e-4)
        tau = quadrature_tolerance(grid.h, grid.length, algebra.sup_norm(f), 3.0)
        assert report.orders[-1].defect <= 10 * tau

    @pytest.mark.slow
    def test_constant_example_acceptance_grid(self, algebra, resolvents):
        grid = Grid(0.0, 1.0, 1601)
        sk = validation_service.constant_sum_kernel(grid, 1.0, 2.0)
        g = algebra.identity(grid)
        f0, _ = resolvents.solve_resummed(sk, g, n_orders=1)
        f, report = resolvents.solve_resummed(sk, g, n_orders=60, track_defect=False)
        assert column_at(f0, 1600) == pytest.approx(4 * math.e ** 2 - math.e, rel=1e-4)
        assert column_at(f, 1600) == pytest.approx(3 * math.e ** 3, rel=1e-4)

    def test_single_component_stops_at_order_zero(self, algebra, resolvents, unit_grid):
        comp = SeparableComponent(algebra.make_function(unit_grid, 3.0), algebra.make_function(unit_grid, 1.0))
        f, report = resolvents.solve_resummed(SumKernel.of(comp), algebra.identity(unit_grid), n_orders=10)
        assert report.converged
        assert report.orders_computed == 1
        assert column_at(f, 100) == pytest.approx(3 * math.exp(3), rel=1e-12)

    def test_neumann_and_resummed_agree(self, algebra, resolvents, three_component):
        g = algebra.identity(three_component.grid)
        f_r, r = resolvents.solve_resummed(three_component, g, n_orders=60)
        f_n, n = resolvents.solve_neumann(three_component, g, n_orders=60)
        assert r.converged and n.converged
        grid = three_component.grid
        tau = quadrature_tolerance(grid.h, grid.length, algebra.sup_norm(f_r), algebra.sup_norm(three_component.total()))
        assert algebra.distance(f_r, f_n) <= 10 * tau

    def test_neumann_not_converged_in_two_orders(self, algebra, resolvents, constant_ab):
        _, report = resolvents.solve_neumann(constant_ab, algebra.identity(constant_ab.grid), n_orders=2)
        assert not report.converged
        assert report.orders_computed == 2

    def test_rejects_zero_orders(self, algebra, resolvents, constant_ab):
        g = algebra.identity(constant_ab.grid)
        with pytest.raises(ValueError):
            resolvents.solve_neumann(constant_ab, g, n_orders=-1)

    def test_solve_separable_with_delta_inhomogeneity(self, algebra, resolvents, unit_grid):
        comp = SeparableComponent(algebra.make_function(unit_grid, unit_grid.nodes), algebra.make_function(unit_grid, 1.0))
        f = resolvents.solve_separable(comp, algebra.identity(unit_grid))
        assert algebra.distance(f, resolvents.resolvent_separable(comp)) < 1e-14

    def test_solve_separable_solves_the_equation(self, algebra, resolvents, unit_grid):
        comp = SeparableComponent(algebra.make_function(unit_grid, 1.0), algebra.make_function(unit_grid, 1.0))
        g = algebra.make_kernel(unit_grid, 0, lambda tp, t: np.cos(tp - t))
        f = resolvents.solve_separable(comp, g)
        assert resolvents.defect(comp.to_kernel(), g, f) < 1e-3


class TestErrorAccounting:
    def test_truncation_identity(self, algebra, resolvents, constant_ab):
        g = algebra.identity(constant_ab.grid)
        plan = resolvents.prepare(constant_ab)
        reference, report = resolvents.reference_solution(constant_ab, g, plan=plan)
        assert report.converged
        for n in (1, 2, 3):
            assert resolvents.truncation_error_check(constant_ab, g, n, reference=reference, plan=plan) <= 1e-6

    def test_neumann_truncation_identity(self, algebra, resolvents, constant_ab):
        g = algebra.identity(constant_ab.grid)
        reference, _ = resolvents.solve_neumann(constant_ab, g, n_orders=100)
        for n in (1, 2, 3):
            assert resolvents.neumann_truncation_check(constant_ab, g, n, reference) <= 1e-6

    def test_permutation_invariance_two_components(self, algebra, resolvents, constant_ab):
        g = algebra.identity(constant_ab.grid)
        f_a, _ = resolvents.reference_solution(constant_ab, g, order=[1, 0])
        f_b, _ = resolvents.reference_solution(constant_ab, g, order=[0, 1])
        assert algebra.distance(f_a, f_b) <= 1e-8

    def test_permutation_invariance_three_components(self, algebra, resolvents, three_component):
        g = algebra.identity(three_component.grid)
        f_a, _ = resolvents.reference_solution(three_component, g)
        f_b, _ = resolvents.reference_solution(three_component, g, order=[0, 2, 1])
        grid = three_component.grid
        tau = quadrature_tolerance(grid.h, grid.length, algebra.sup_norm(f_a), algebra.sup_norm(three_component.total()))
        assert algebra.distance(f_a, f_b) <= 10 * tau

    def test_series_bound_values(self):
        assert series_bound(2.0, 0.0, 1.0, 1.0, 0) == 2.0
        assert series_bound(1.0, 0.0, 3.0, 1.0, 2) == pytest.approx(4.5)
        assert series_bound(1.0, 1.0, 2.0, 1.0, 3) == pytest.approx(16 / 3)
        assert series_bound(1.0, 1.0, 0.0, 1.0, 3) == 0.0

    def test_speedup_comparison(self, algebra, resolvents):
        grid = Grid(0.0, 1.0, 101)
        sk = validation_service.constant_sum_kernel(grid, 1.0, 0.05)
        comparison = resolvents.compare_methods(sk, algebra.identity(grid), n_orders=7)
        assert comparison.reference_report.converged
        assert len(comparison.resummed.orders) == len(comparison.neumann.orders) == 7
        for r, n in zip(comparison.resummed.orders, comparison.neumann.orders):
            assert r.error <= n.error
        assert comparison.resummed.bounds_hold
        assert comparison.neumann.bounds_hold
        assert comparison.resummed.constants.C_T < comparison.resummed.constants.C_K

    def test_constant_bounds_dominate_errors(self, algebra, resolvents, constant_ab):
        comparison = resolvents.compare_methods(constant_ab, algebra.identity(constant_ab.grid), n_orders=7)
        for report in (comparison.resummed, comparison.neumann):
            assert report.bounds_hold
            for record in report.orders:
                assert record.error <= record.bound

    def test_identity_residuals_filled(self, algebra, resolvents, constant_ab):
        comparison = resolvents.compare_methods(
            constant_ab, algebra.identity(constant_ab.grid), n_orders=4, identity_orders=2
        )
        residuals = [r.identity_residual for r in comparison.resummed.orders]
        assert residuals[0] <= 1e-6 and residuals[1] <= 1e-6
        assert residuals[2] is None

    def test_lemma_checks_report_every_component(self, resolvents, three_component):
        checks = resolvents.lemma_checks(three_component)
        assert [c.index for c in checks] == [0, 1, 2]
        assert all(c.passed for c in checks)
