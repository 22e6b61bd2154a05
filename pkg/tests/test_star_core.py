import math

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from core.exceptions import GridMismatchError, KernelEvaluationError
from modules.star_core.models import Grid, TriangularField
from modules.star_core.schemas import GridSpec
from modules.star_core.service import star_algebra


def theta_power_error(algebra, n_points, max_k=6):
    grid = Grid(0.0, 1.0, n_points)
    theta = algebra.theta(grid)
    delta = grid.nodes[:, np.newaxis] - grid.nodes[np.newaxis, :]
    mask = np.tri(n_points, dtype=bool)
    worst = 0.0
    for k in range(1, max_k + 1):
        expected = np.where(mask, delta ** (k - 1) / math.factorial(k - 1), 0.0)
        worst = max(worst, float(np.max(np.abs(algebra.star_power(theta, k).values - expected))))
    return worst


class TestGrid:
    def test_step_and_nodes(self):
        grid = Grid(0.0, 2.0, 5)
        assert grid.h == 0.5
        assert grid.length == 2.0
        np.testing.assert_allclose(grid.nodes, [0.0, 0.5, 1.0, 1.5, 2.0])

    @pytest.mark.parametrize("t_min,t_max,n", [(1.0, 0.0, 5), (0.0, 0.0, 5), (0.0, 1.0, 1)])
    def test_rejects_degenerate_grids(self, t_min, t_max, n):
        with pytest.raises(ValueError):
            Grid(t_min, t_max, n)

    def test_index_of(self):
        grid = Grid(0.0, 1.0, 11)
        assert grid.index_of(0.5) == 5
        with pytest.raises(ValueError):
            grid.index_of(0.55)

    def test_grid_spec(self):
        assert GridSpec(t_min=0, t_max=2, n=3).to_grid() == Grid(0.0, 2.0, 3)
        with pytest.raises(ValueError):
            GridSpec(t_min=1, t_max=0, n=3)


class TestTriangularField:
    def test_upper_triangle_is_zeroed_and_read_only(self, small_grid):
        field = TriangularField(small_grid, np.ones((21, 21)))
        assert field.values[0, 1] == 0
        assert field[3, 1] == 1
        with pytest.raises(ValueError):
            field.values[2, 1] = 5.0

    def test_rejects_wrong_shape(self, small_grid):
        with pytest.raises(ValueError):
            TriangularField(small_grid, np.ones((3, 3)))

    def test_index_above_diagonal(self, small_grid):
        field = TriangularField(small_grid, np.ones((21, 21)))
        with pytest.raises(IndexError):
            field[1, 2]


class TestConstruction:
    def test_make_kernel_from_callable(self, algebra, small_grid):
        k = algebra.make_kernel(small_grid, 2.0, lambda tp, t: tp - t)
        assert k.delta_coeff == 2.0
        assert k.at(20, 0) == pytest.approx(1.0)
        assert k.values[0, 20] == 0

    def test_make_kernel_falls_back_to_pointwise(self, algebra, small_grid):
        k = algebra.make_kernel(small_grid, 0, lambda tp, t: math.sqrt(tp - t))
        assert k.at(20, 4) == pytest.approx(math.sqrt(0.8))

    def test_non_finite_kernel_reports_node(self, algebra, small_grid):
        with pytest.raises(KernelEvaluationError) as exc:
            algebra.make_kernel(small_grid, 0, lambda tp, t: 1.0 / (tp - t))
        assert exc.value.node == (0.0, 0.0)
        assert "at node (0, 0)" in str(exc.value)

    def test_pointwise_failure_reports_node(self, algebra, small_grid):
        with pytest.raises(KernelEvaluationError) as exc:
            algebra.make_kernel(small_grid, 0, lambda tp, t: math.log(tp - t))
        assert exc.value.node == (0.0, 0.0)

    def test_make_function_length_checked(self, algebra, small_grid):
        with pytest.raises(GridMismatchError):
            algebra.make_function(small_grid, np.ones(5))

    def test_lifts(self, algebra, small_grid):
        m = algebra.make_function(small_grid, small_grid.nodes)
        assert algebra.lift_left(m).at(10, 3) == pytest.approx(0.5)
        assert algebra.lift_right(m).at(10, 3) == pytest.approx(0.15)


class TestStarProduct:
    def test_identity_is_neutral(self, algebra, small_grid):
        k = algebra.make_kernel(small_grid, 0.5, lambda tp, t: np.exp(tp) * np.cos(t))
        one = algebra.identity(small_grid)
        assert algebra.distance(algebra.star_product(one, k), k) == 0
        assert algebra.distance(algebra.star_product(k, one), k) == 0

    def test_delta_parts_multiply(self, algebra, small_grid):
        two = algebra.scale(algebra.identity(small_grid), 2.0)
        three = algebra.scale(algebra.identity(small_grid), 3.0)
        product = algebra.star_product(two, three)
        assert product.delta_coeff == 6.0
        assert not np.any(product.values)

    def test_delta_times_smooth(self, algebra, small_grid):
        k = algebra.make_kernel(small_grid, 0, lambda tp, t: tp + t)
        product = algebra.star_product(algebra.scale(algebra.identity(small_grid), 3.0), k)
        np.testing.assert_allclose(product.values, 3.0 * k.values)

    def test_theta_squared_is_exact(self, algebra, small_grid):
        theta = algebra.theta(small_grid)
        delta = np.tril(small_grid.nodes[:, np.newaxis] - small_grid.nodes[np.newaxis, :])
        np.testing.assert_allclose(algebra.star_product(theta, theta).values, delta, atol=1e-14)

    def test_theta_power_law(self, algebra):
        assert theta_power_error(algebra, 201) <= 5e-5

    def test_theta_power_law_fails_on_coarse_grid(self, algebra):
        error = theta_power_error(algebra, 21)
        assert error > 5e-5
        assert error == pytest.approx(0.05 ** 2 / 12, rel=0.1)

    def test_theta_power_error_is_second_order(self, algebra):
        ratio = theta_power_error(algebra, 101) / theta_power_error(algebra, 201)
        assert 3.8 < ratio < 4.2

    @pytest.mark.slow
    def test_theta_power_law_acceptance_grid(self, algebra):
        assert theta_power_error(algebra, 801) <= 5e-5

    def test_associative_up_to_quadrature(self, algebra):
        grid = Grid(0.0, 1.0, 101)
        f = algebra.make_kernel(grid, 0, lambda tp, t: np.exp(tp - t))
        g = algebra.make_kernel(grid, 0, lambda tp, t: np.sin(tp + t))
        h = algebra.make_kernel(grid, 0, lambda tp, t: np.cos(t) + 0 * tp)
        left = algebra.star_product(algebra.star_product(f, g), h)
        right = algebra.star_product(f, algebra.star_product(g, h))
        assert algebra.distance(left, right) < 1e-4

    @hyp_settings(max_examples=30, deadline=None)
    @given(
        alpha=st.floats(-3, 3, allow_nan=False),
        beta=st.floats(-3, 3, allow_nan=False),
        seed=st.integers(0, 2 ** 16),
    )
    def test_bilinear(self, alpha, beta, seed):
        algebra = star_algebra
        grid = Grid(0.0, 1.0, 7)
        rng = np.random.default_rng(seed)
        f, g, h = (algebra.kernel(grid, rng.normal(), rng.normal(size=(7, 7))) for _ in range(3))
        left = algebra.star_product(f, algebra.combine((alpha, g), (beta, h)))
        right = algebra.combine((alpha, algebra.star_product(f, g)), (beta, algebra.star_product(f, h)))
        assert algebra.distance(left, right) <= 1e-12 * (1 + abs(alpha) + abs(beta)) * 100

    def test_grid_mismatch(self, algebra):
        with pytest.raises(GridMismatchError):
            algebra.star_product(algebra.identity(Grid(0, 1, 5)), algebra.identity(Grid(0, 1, 6)))


class TestOneVariableHelpers:
    def test_sandwich_of_delta_is_theta_squared(self, algebra, small_grid):
        R = algebra.sandwich_ones(algebra.identity(small_grid))
        delta = np.tril(small_grid.nodes[:, np.newaxis] - small_grid.nodes[np.newaxis, :])
        np.testing.assert_allclose(R.values, delta, atol=1e-14)
        assert R.delta_coeff == 0

    def test_sandwich_of_theta(self, algebra, small_grid):
        R = algebra.sandwich_ones(algebra.theta(small_grid))
        delta = np.tril(small_grid.nodes[:, np.newaxis] - small_grid.nodes[np.newaxis, :])
        np.testing.assert_allclose(R.values, delta ** 2 / 2, atol=1e-14)

    def test_integrate_left_edge(self, algebra, small_grid):
        a = algebra.integrate_left_edge(algebra.identity(small_grid), 0)
        np.testing.assert_allclose(a.samples, 1.0)
        b = algebra.integrate_left_edge(algebra.theta(small_grid), 0)
        np.testing.assert_allclose(b.samples, small_grid.nodes, atol=1e-14)

    def test_integrate_left_edge_zero_before_start(self, algebra, small_grid):
        a = algebra.integrate_left_edge(algebra.identity(small_grid), 5)
        assert a(4) == 0 and a(5) == 1

    def test_integrate_left_edge_bad_index(self, algebra, small_grid):
        with pytest.raises(ValueError):
            algebra.integrate_left_edge(algebra.identity(small_grid), 21)


class TestNormsAndRows:
    def test_sup_norm_excludes_delta(self, algebra, small_grid):
        k = algebra.make_kernel(small_grid, 10.0, lambda tp, t: tp - t)
        assert algebra.sup_norm(k) == pytest.approx(1.0)

    def test_distance_includes_delta(self, algebra, small_grid):
        one = algebra.identity(small_grid)
        assert algebra.distance(one, algebra.zero(small_grid)) == 1.0

    def test_field_rows_stride_keeps_corner(self, algebra):
        grid = Grid(0.0, 1.0, 11)
        rows = list(algebra.field_rows(algebra.theta(grid), stride=3))
        assert len(rows) == 15
        assert (10, 0) in [(i, j) for i, j, *_ in rows]
        assert all(i >= j for i, j, *_ in rows)

    def test_summarize(self, algebra, small_grid):
        summary = algebra.summarize(algebra.scale(algebra.identity(small_grid), 2 + 1j))
        assert summary.delta_coeff_re == 2.0
        assert summary.delta_coeff_im == 1.0
        assert summary.n_points == 21
