"""
Worked scenarios with independent oracles: the constant sum kernel a + b with
its closed forms, and the driven two-level (confluent Heun) system checked
against classic Runge-Kutta integration of the ODE.
"""
import logging
import math
from dataclasses import replace
from typing import Any, Callable, List, Mapping, Optional, Tuple

import numpy as np

from config.settings import settings
from modules.resolvents.models import SeparableComponent, SumKernel
from modules.resolvents.service import ResolventService, resolvent_service
from modules.star_core.models import GeneralizedKernel, Grid, OneVariableFunction
from modules.star_core.service import StarAlgebra, star_algebra

from .models import ComparisonTable, ConstantKernelOracle, HeunProblem, HeunRun
from .schemas import ConstantParams, ConstantSummary, HeunParams, HeunSummary, OracleDeviation

logger = logging.getLogger(__name__)

HEUN_TOLERANCE = 1e-3


def rk4_step(y: np.ndarray, t: float, dt: float, rhs: Callable) -> np.ndarray:
    """One classic fourth-order Runge-Kutta step for y' = rhs(t, y)"""
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + (k1 + 2 * k2 + 2 * k3 + k4) * dt / 6


def _relative_deviation(solver: np.ndarray, oracle: np.ndarray) -> float:
    scale = float(np.max(np.abs(oracle)))
    error = float(np.max(np.abs(solver - oracle)))
    return error / scale if scale > 0 else error


class ValidationService:
    def __init__(self, algebra: StarAlgebra = star_algebra, resolvents: ResolventService = resolvent_service):
        self.algebra = algebra
        self.resolvents = resolvents

    # Constant kernel

    def constant_oracle(self, a: float, b: float) -> ConstantKernelOracle:
        return ConstantKernelOracle(a, b)

    def constant_exact(self, a: float, b: float, delta):
        """(a + b) e^{(a + b) d}"""
        return ConstantKernelOracle(a, b).exact(delta)

    def constant_f0(self, a: float, b: float, delta):
        """(a^2 e^{a d} - b^2 e^{b d}) / (a - b)"""
        return ConstantKernelOracle(a, b).f0(delta)

    def constant_f1_order(self, a: float, b: float, tp, t):
        return ConstantKernelOracle(a, b).f1(np.asarray(tp) - np.asarray(t))

    def constant_T(self, a: float, b: float, delta):
        """ab (e^{a d} - e^{b d}) / (a - b)"""
        return ConstantKernelOracle(a, b).T(delta)

    def constant_components(self, grid: Grid, args: Mapping[str, Any]) -> List[SeparableComponent]:
        """Builtin "constant_ab": a Theta and b Theta as separable components"""
        components = []
        for name in ("a", "b"):
            c = float(args[name])
            components.append(SeparableComponent(
                self.algebra.make_function(grid, c),
                self.algebra.make_function(grid, 1.0),
            ))
        return components

    def constant_sum_kernel(self, grid: Grid, a: float, b: float) -> SumKernel:
        return SumKernel(grid, tuple(self.constant_components(grid, {"a": a, "b": b})))

    def run_constant_example(self, params: Optional[ConstantParams] = None) -> Tuple[ConstantSummary, ComparisonTable]:
        """Resummed solver against the closed forms along the column t = t_min"""
        params = params or ConstantParams()
        grid = Grid(0.0, params.t_max, params.n)
        sk = self.constant_sum_kernel(grid, params.a, params.b)
        g = self.algebra.identity(grid)
        oracle = self.constant_oracle(params.a, params.b)

        plan = self.resolvents.prepare(sk)
        f0, _ = self.resolvents.solve_resummed(sk, g, n_orders=1, abs_tol=0.0, rel_tol=0.0, plan=plan)
        f1, _ = self.resolvents.solve_resummed(sk, g, n_orders=2, abs_tol=0.0, rel_tol=0.0, plan=plan)
        exact, report = self.resolvents.solve_resummed(
            sk, g, n_orders=settings.NEUMANN_MAX_TERMS, track_defect=False, plan=plan
        )

        delta = grid.nodes - grid.t_min
        columns = {
            "f0": (f0.values[:, 0], oracle.f0(delta)),
            "f1": (f1.values[:, 0], oracle.f1(delta)),
            "exact": (exact.values[:, 0], oracle.exact(delta)),
            "T": (plan.T.values[:, 0], oracle.T(delta)),
        }

        deviations = []
        for name, (solver, expected) in columns.items():
            deviations.append(OracleDeviation(
                quantity=name,
                solver_at_corner=float(np.real(solver[-1])),
                oracle_at_corner=float(np.real(expected[-1])),
                max_relative_deviation=_relative_deviation(solver, expected),
            ))

        summary = ConstantSummary(
            a=params.a,
            b=params.b,
            n_points=grid.n_points,
            deviations=deviations,
            max_relative_deviation=max(d.max_relative_deviation for d in deviations),
            report=report,
        )

        header = ["t_prime_minus_t"]
        for name in columns:
            header += [f"{name}_solver", f"{name}_oracle"]
        rows = []
        for i, d in enumerate(delta):
            row = [float(d)]
            for solver, expected in columns.values():
                row += [float(np.real(solver[i])), float(np.real(expected[i]))]
            rows.append(row)

        logger.info(f"✅ Constant example: max relative deviation {summary.max_relative_deviation:.3e}")
        return summary, ComparisonTable(header, rows)

    # Heun system

    def heun_problem(self, grid: Grid, args: Mapping[str, Any]) -> HeunProblem:
        return HeunProblem(
            f1=float(args["f1"]),
            nu=float(args["nu"]),
            omega=float(args["omega"]),
            grid=grid,
            convention=str(args.get("convention", "ode")),
            kernel_mode=str(args.get("kernel_mode", "numeric")),
        )

    def heun_F_component(self, p: HeunProblem) -> SeparableComponent:
        """kappa_F f(t') Theta, whose resolvent is F"""
        kappa = p.coefficients["kappa_F"]
        return SeparableComponent(
            self.algebra.make_function(p.grid, kappa * p.drive(p.grid.nodes), dtype=np.complex128),
            self.algebra.make_function(p.grid, 1.0, dtype=np.complex128),
        )

    def heun_build_F(self, p: HeunProblem) -> GeneralizedKernel:
        """
        F = 1_* + kappa_F f1 sin(w t') exp(-(kappa_F f1 / w)(cos(w t') - cos(w t))) Theta
        """
        kappa = p.coefficients["kappa_F"]
        w = p.omega
        tp = p.grid.nodes[:, np.newaxis]
        t = p.grid.nodes[np.newaxis, :]
        values = kappa * p.f1 * np.sin(w * tp) * np.exp(-(kappa * p.f1 / w) * (np.cos(w * tp) - np.cos(w * t)))
        return self.algebra.kernel(p.grid, 1, np.tril(values).astype(np.complex128))

    def heun_R(self, p: HeunProblem) -> GeneralizedKernel:
        """R = 1*F*1"""
        return self.algebra.sandwich_ones(self.heun_build_F(p))

    def heun_split_discrepancy(self, p: HeunProblem, R: Optional[GeneralizedKernel] = None) -> float:
        """sup |R(t', t) - (s(t') - s(t))| with s(t) = R(t, t_min)"""
        R = R if R is not None else self.heun_R(p)
        s = R.values[:, 0]
        split = np.tril(s[:, np.newaxis] - s[np.newaxis, :])
        return float(np.max(np.abs(R.values - split)))

    def heun_build_kernel(self, p: HeunProblem, R: Optional[GeneralizedKernel] = None) -> SumKernel:
        """
        K = k1 f(t') Theta + k2 R. In split mode R is replaced by s(t') - s(t)
        and both parts become separable.
        """
        k1, k2 = p.coefficients["k1"], p.coefficients["k2"]
        grid = p.grid
        drive = p.drive(grid.nodes).astype(np.complex128)
        ones = self.algebra.make_function(grid, 1.0, dtype=np.complex128)

        if p.nu == 0:
            return SumKernel(grid, (SeparableComponent(self.algebra.make_function(grid, k1 * drive), ones),))

        R = R if R is not None else self.heun_R(p)
        if p.kernel_mode == "numeric":
            components = (
                SeparableComponent(self.algebra.make_function(grid, k1 * drive), ones),
                self.algebra.scale(R, k2),
            )
        else:
            s = R.values[:, 0]
            components = (
                SeparableComponent(self.algebra.make_function(grid, k1 * drive + k2 * s), ones),
                SeparableComponent(ones, self.algebra.make_function(grid, -k2 * s)),
            )
        return SumKernel(grid, components)

    def heun_components(self, grid: Grid, args: Mapping[str, Any]) -> List:
        """Builtin "heun_xie_hai"(f1, nu, omega)"""
        return list(self.heun_build_kernel(self.heun_problem(grid, args)).components)

    def heun_volterra_run(self, p: HeunProblem, n_orders: Optional[int] = None) -> HeunRun:
        """Solve a' = 1_* + K*a' by the resummed series and integrate from t_min"""
        R = None if p.nu == 0 else self.heun_R(p)
        sk = self.heun_build_kernel(p, R=R)
        g = self.algebra.identity(p.grid, dtype=np.complex128)
        f, report = self.resolvents.solve_resummed(
            sk, g, n_orders=n_orders or settings.NEUMANN_MAX_TERMS, track_defect=False
        )
        a = self.algebra.integrate_left_edge(f, 0)
        discrepancy = 0.0 if R is None else self.heun_split_discrepancy(p, R)
        return HeunRun(a=a, report=report, split_discrepancy=discrepancy)

    def heun_volterra_solve(
        self, p: HeunProblem, n_orders: Optional[int] = None, extrapolate: bool = False
    ) -> OneVariableFunction:
        """
        a(t) on the grid of p. With `extrapolate` the h^2 term of the trapezoid
        error is removed by Richardson extrapolation against the solve on every
        other node; the correction is interpolated linearly onto the odd nodes.
        """
        if not extrapolate:
            return self.heun_volterra_run(p, n_orders).a

        grid = p.grid
        if grid.n_points % 2 == 0 or grid.n_points < 5:
            raise ValueError(f"Extrapolation needs an odd number of grid points >= 5, got {grid.n_points}")
        a = self.heun_volterra_run(p, n_orders).a
        coarse = replace(p, grid=Grid(grid.t_min, grid.t_max, (grid.n_points + 1) // 2))
        a_coarse = self.heun_volterra_run(coarse, n_orders).a

        correction = (a.samples[::2] - a_coarse.samples) / 3.0
        nodes = grid.nodes
        on_grid = np.interp(nodes, nodes[::2], correction.real) + 1j * np.interp(nodes, nodes[::2], correction.imag)
        logger.debug(f"Richardson correction sup {np.max(np.abs(on_grid)):.3e}")
        return OneVariableFunction(grid, a.samples + on_grid)

    def heun_ode_oracle(
        self,
        p: HeunProblem,
        a0: complex = 1.0,
        b0: complex = 0.0,
        steps: int = 20000,
    ) -> Tuple[OneVariableFunction, OneVariableFunction]:
        """
        RK4 integration of 2i w a' = nu b + f a, 2i w b' = nu a - f b, sampled
        at the grid nodes. `steps` is spread over the grid intervals, at least
        one step per interval.
        """
        grid = p.grid
        nodes = grid.nodes
        substeps = max(1, math.ceil(steps / (grid.n_points - 1)))
        dt = grid.h / substeps
        kappa = -0.5j / p.omega

        def rhs(t, y):
            f = p.f1 * math.sin(p.omega * t)
            return np.array([kappa * (p.nu * y[1] + f * y[0]), kappa * (p.nu * y[0] - f * y[1])])

        y = np.array([a0, b0], dtype=np.complex128)
        samples = np.empty((grid.n_points, 2), dtype=np.complex128)
        samples[0] = y
        for i in range(grid.n_points - 1):
            for s in range(substeps):
                y = rk4_step(y, nodes[i] + s * dt, dt, rhs)
            samples[i + 1] = y

        return OneVariableFunction(grid, samples[:, 0]), OneVariableFunction(grid, samples[:, 1])

    def run_heun_example(self, params: Optional[HeunParams] = None) -> Tuple[HeunSummary, ComparisonTable]:
        """Volterra solution of the Heun system against the RK4 oracle"""
        params = params or HeunParams()
        p = HeunProblem.create(
            f1=params.f1,
            nu=params.nu,
            omega=params.omega,
            horizon=params.horizon,
            n_points=params.n,
            convention=params.convention,
            kernel_mode=params.kernel_mode,
        )

        run = self.heun_volterra_run(p)
        a_rk4, _ = self.heun_ode_oracle(p, steps=params.rk4_steps)
        diff = np.abs(run.a.samples - a_rk4.samples)
        sup_abs_diff = float(np.max(diff))
        max_abs_rk4 = float(np.max(np.abs(a_rk4.samples)))
        relative = sup_abs_diff / max_abs_rk4

        split_sup_abs_diff = None
        if params.include_split and params.kernel_mode == "numeric" and p.nu != 0:
            split_problem = HeunProblem(p.f1, p.nu, p.omega, p.grid, p.convention, "split")
            split_run = self.heun_volterra_run(split_problem)
            split_sup_abs_diff = float(np.max(np.abs(split_run.a.samples - a_rk4.samples)))

        summary = HeunSummary(
            params=params,
            sup_abs_diff=sup_abs_diff,
            max_abs_rk4=max_abs_rk4,
            relative_deviation=relative,
            tolerance=HEUN_TOLERANCE,
            passed=relative <= HEUN_TOLERANCE,
            split_discrepancy=run.split_discrepancy,
            split_sup_abs_diff=split_sup_abs_diff,
            parameter_map={k: [complex(v).real, complex(v).imag] for k, v in p.parameter_map().items()},
            report=run.report,
        )

        header = ["t", "a_volterra_re", "a_volterra_im", "a_rk4_re", "a_rk4_im", "abs_diff"]
        rows = [
            [float(t), v.real, v.imag, r.real, r.imag, float(d)]
            for t, v, r, d in zip(p.grid.nodes, run.a.samples, a_rk4.samples, diff)
        ]

        status = "✅" if summary.passed else "❌"
        logger.info(
            f"{status} Heun example: sup|a_volterra - a_rk4| = {sup_abs_diff:.3e} "
            f"({relative:.3e} relative), split discrepancy {run.split_discrepancy:.3e}"
        )
        return summary, ComparisonTable(header, rows)


validation_service = ValidationService()
