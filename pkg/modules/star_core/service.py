"""
The *-product algebra on grid-discretized generalized kernels.

A kernel c*delta(t' - t) + k(t', t)*Theta(t' - t) is stored as its constant delta
coefficient c plus the lower-triangular samples k(t_i, t_j). Products evaluate

    (f*g)(t', t) = c_f*g(t', t) + c_g*f(t', t) + int_t^t' f(t', tau) g(tau, t) dtau

with the composite trapezoid rule of the shared grid.
"""
import logging
from typing import Callable, Iterator, Optional, Tuple, Union

import numpy as np

from core.exceptions import KernelEvaluationError
from core.quadrature import column_cumulative, row_integral, triangular_product
from utils.validators import ensure_finite_field, ensure_finite_samples, ensure_length, ensure_same_grid

from .models import GeneralizedKernel, Grid, OneVariableFunction, Scalar, TriangularField
from .schemas import KernelSummary

logger = logging.getLogger(__name__)

TwoVariableSource = Union[Scalar, Callable, np.ndarray]
OneVariableSource = Union[Scalar, Callable, np.ndarray]

FIELD_DTYPES = {"real": np.float64, "complex": np.complex128}

_EVAL_ERRORS = (ArithmeticError, ValueError, TypeError)


def field_dtype(field: str):
    try:
        return FIELD_DTYPES[field]
    except KeyError:
        raise ValueError(f"Unknown field '{field}', expected one of {sorted(FIELD_DTYPES)}")


class StarAlgebra:
    # Construction

    def kernel(self, grid: Grid, delta_coeff: Scalar, values: np.ndarray) -> GeneralizedKernel:
        return GeneralizedKernel(delta_coeff, TriangularField(grid, values))

    def identity(self, grid: Grid, dtype=np.float64) -> GeneralizedKernel:
        """1_* = delta(t' - t)"""
        n = grid.n_points
        return self.kernel(grid, 1, np.zeros((n, n), dtype=dtype))

    def zero(self, grid: Grid, dtype=np.float64) -> GeneralizedKernel:
        n = grid.n_points
        return self.kernel(grid, 0, np.zeros((n, n), dtype=dtype))

    def theta(self, grid: Grid, c: Scalar = 1.0) -> GeneralizedKernel:
        """c*Theta(t' - t)"""
        n = grid.n_points
        return self.kernel(grid, 0, np.full((n, n), c))

    def make_kernel(self, grid: Grid, c: Scalar, k: TwoVariableSource, dtype=None) -> GeneralizedKernel:
        """
        Sample k(t_i, t_j) on every node pair i >= j.

        `k` is a constant, an (n, n) array, or a callable k(tp, t) which is first
        tried vectorized on the node mesh and, if that fails, node by node so the
        failing node can be reported.
        """
        nodes = grid.nodes
        n = grid.n_points
        if callable(k):
            tp = nodes[:, np.newaxis]
            t = nodes[np.newaxis, :]
            try:
                with np.errstate(all="ignore"):
                    values = np.broadcast_to(np.asarray(k(tp, t)), (n, n))
            except _EVAL_ERRORS:
                values = self._sample_pointwise(grid, k)
        else:
            values = np.broadcast_to(np.asarray(k), (n, n))

        values = np.tril(values)
        if dtype is not None:
            values = values.astype(dtype)
        ensure_finite_field(values, nodes)
        return self.kernel(grid, c, values)

    def _sample_pointwise(self, grid: Grid, k: Callable) -> np.ndarray:
        nodes = grid.nodes
        n = grid.n_points
        values = np.zeros((n, n), dtype=np.complex128)
        for i in range(n):
            for j in range(i + 1):
                try:
                    values[i, j] = k(nodes[i], nodes[j])
                except _EVAL_ERRORS as e:
                    raise KernelEvaluationError(f"Kernel evaluation failed ({e})", node=(nodes[i], nodes[j]))
        if not np.any(values.imag):
            values = values.real
        return values

    def make_function(self, grid: Grid, m: OneVariableSource, dtype=None) -> OneVariableFunction:
        """Sample a one-variable function on the grid nodes"""
        nodes = grid.nodes
        if callable(m):
            try:
                with np.errstate(all="ignore"):
                    samples = np.broadcast_to(np.asarray(m(nodes)), nodes.shape)
            except _EVAL_ERRORS as e:
                raise KernelEvaluationError(f"Function evaluation failed ({e})")
        else:
            samples = np.asarray(m)
            if samples.ndim == 0:
                samples = np.broadcast_to(samples, nodes.shape)
            ensure_length(samples, grid.n_points)
        if dtype is not None:
            samples = samples.astype(dtype)
        ensure_finite_samples(samples, nodes)
        return OneVariableFunction(grid, samples)

    # Linear structure

    def add(self, f: GeneralizedKernel, g: GeneralizedKernel) -> GeneralizedKernel:
        ensure_same_grid(f.grid, g.grid)
        return self.kernel(f.grid, f.delta_coeff + g.delta_coeff, f.values + g.values)

    def subtract(self, f: GeneralizedKernel, g: GeneralizedKernel) -> GeneralizedKernel:
        ensure_same_grid(f.grid, g.grid)
        return self.kernel(f.grid, f.delta_coeff - g.delta_coeff, f.values - g.values)

    def scale(self, f: GeneralizedKernel, s: Scalar) -> GeneralizedKernel:
        return self.kernel(f.grid, s * f.delta_coeff, s * f.values)

    def combine(self, *terms: Tuple[Scalar, GeneralizedKernel]) -> GeneralizedKernel:
        """Scalar linear combination sum(s_k * f_k)"""
        ensure_same_grid(*(f.grid for _, f in terms))
        delta = sum(s * f.delta_coeff for s, f in terms)
        values = sum(s * f.values for s, f in terms)
        return self.kernel(terms[0][1].grid, delta, values)

    # Products

    def star_product(self, f: GeneralizedKernel, g: GeneralizedKernel) -> GeneralizedKernel:
        """(f*g) with delta part c_f*c_g"""
        ensure_same_grid(f.grid, g.grid)
        if f.is_identity:
            return g
        if g.is_identity:
            return f

        c_f, c_g = f.delta_coeff, g.delta_coeff
        values = triangular_product(f.values, g.values, f.grid.h)
        if c_f != 0:
            values = values + c_f * g.values
        if c_g != 0:
            values = values + c_g * f.values
        return self.kernel(f.grid, c_f * c_g, values)

    def star_chain(self, *factors: GeneralizedKernel) -> GeneralizedKernel:
        """Left-to-right product f_1*f_2*...*f_m, evaluated from the right"""
        result = factors[-1]
        for factor in reversed(factors[:-1]):
            result = self.star_product(factor, result)
        return result

    def star_power(self, f: GeneralizedKernel, n: int) -> GeneralizedKernel:
        if n < 0:
            raise ValueError(f"star_power needs n >= 0, got {n}")
        result = self.identity(f.grid, dtype=f.values.dtype)
        for _ in range(n):
            result = self.star_product(f, result)
        return result

    def iter_powers(self, f: GeneralizedKernel, base: Optional[GeneralizedKernel] = None) -> Iterator[GeneralizedKernel]:
        """Yield base, f*base, f*f*base, ...; base defaults to 1_*"""
        term = base if base is not None else self.identity(f.grid, dtype=f.values.dtype)
        while True:
            yield term
            term = self.star_product(f, term)

    # One-variable functions

    def lift_left(self, m: OneVariableFunction) -> GeneralizedKernel:
        """m(t') Theta(t' - t)"""
        n = m.grid.n_points
        return self.kernel(m.grid, 0, np.broadcast_to(m.samples[:, np.newaxis], (n, n)))

    def lift_right(self, m: OneVariableFunction) -> GeneralizedKernel:
        """m(t) Theta(t' - t)"""
        n = m.grid.n_points
        return self.kernel(m.grid, 0, np.broadcast_to(m.samples[np.newaxis, :], (n, n)))

    def sandwich_ones(self, F: GeneralizedKernel) -> GeneralizedKernel:
        """
        R = 1*F*1, i.e. R(t', t) = int_t^t' [c_F + int_tau1^t' F(tau2, tau1) dtau2] dtau1.

        Evaluated as two nested trapezoid sweeps so that delta and constant
        inputs are integrated exactly.
        """
        h = F.grid.h
        inner = column_cumulative(F.values, h)
        n = F.grid.n_points
        inner = inner + F.delta_coeff * np.tri(n, dtype=bool)
        return self.kernel(F.grid, 0, row_integral(inner, h))

    def integrate_left_edge(self, f: GeneralizedKernel, t_from: int = 0) -> OneVariableFunction:
        """
        t -> c_f + int_{t_from}^t f(tau, t_from) dtau for t >= t_from, zero before.

        `t_from` is a node index; the delta part contributes its coefficient once
        under the Theta(0) = 1 convention.
        """
        n = f.grid.n_points
        if not 0 <= t_from < n:
            raise ValueError(f"t_from index {t_from} outside {f.grid}")
        column = column_cumulative(f.values, f.grid.h)[:, t_from]
        samples = np.where(np.arange(n) >= t_from, f.delta_coeff + column, 0)
        return OneVariableFunction(f.grid, samples)

    # Norms

    def sup_norm(self, f: GeneralizedKernel) -> float:
        """max |k(t_i, t_j)| over i >= j; the delta part is excluded"""
        if f.values.size == 0:
            return 0.0
        return float(np.max(np.abs(f.values)))

    def distance(self, f: GeneralizedKernel, g: GeneralizedKernel) -> float:
        """Sup distance of smooth parts, or of delta parts if larger"""
        ensure_same_grid(f.grid, g.grid)
        smooth = float(np.max(np.abs(f.values - g.values)))
        return max(smooth, float(abs(f.delta_coeff - g.delta_coeff)))

    def summarize(self, f: GeneralizedKernel) -> KernelSummary:
        c = complex(f.delta_coeff)
        return KernelSummary(
            delta_coeff_re=c.real,
            delta_coeff_im=c.imag,
            sup_norm=self.sup_norm(f),
            n_points=f.grid.n_points,
        )

    # Serialization

    def field_rows(self, f: GeneralizedKernel, stride: int = 1) -> Iterator[Tuple[int, int, float, float, float, float]]:
        """
        Rows (i, j, t_i, t_j, re, im) over i >= j, taking every `stride`-th node
        in each direction; the corner (n-1, 0) is always emitted.
        """
        if stride < 1:
            raise ValueError(f"stride must be >= 1, got {stride}")
        n = f.grid.n_points
        nodes = f.grid.nodes
        picked = list(range(0, n, stride))
        if picked[-1] != n - 1:
            picked.append(n - 1)
        for i in picked:
            for j in picked:
                if j > i:
                    break
                value = complex(f.values[i, j])
                yield i, j, float(nodes[i]), float(nodes[j]), value.real, value.imag


star_algebra = StarAlgebra()
