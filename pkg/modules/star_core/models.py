from dataclasses import dataclass, field
from typing import Union

import numpy as np

from core.quadrature import trapezoid_weights

Scalar = Union[float, complex]


def _frozen_array(values: np.ndarray) -> np.ndarray:
    array = np.array(values, copy=True)
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class Grid:
    """Uniform grid t_min + k*h on I = [t_min, t_max]"""
    t_min: float
    t_max: float
    n_points: int

    def __post_init__(self):
        if not self.t_max > self.t_min:
            raise ValueError(f"t_max ({self.t_max}) must exceed t_min ({self.t_min})")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValueError(f"n_points must be an integer >= 2, got {self.n_points}")

    @property
    def h(self) -> float:
        return (self.t_max - self.t_min) / (self.n_points - 1)

    @property
    def length(self) -> float:
        """|I|"""
        return self.t_max - self.t_min

    @property
    def nodes(self) -> np.ndarray:
        return self.t_min + np.arange(self.n_points) * self.h

    def weights(self, j: int, i: int) -> np.ndarray:
        """Trapezoid weights over nodes j..i"""
        return trapezoid_weights(self.h, i - j + 1)

    def index_of(self, t: float) -> int:
        """Node index of coordinate t; t must sit on a node"""
        position = (t - self.t_min) / self.h
        index = int(round(position))
        if index < 0 or index >= self.n_points or abs(position - index) > 1e-9 * max(1.0, abs(position)):
            raise ValueError(f"t={t} is not a node of {self}")
        return index

    def __str__(self) -> str:
        return f"Grid[{self.t_min:g}, {self.t_max:g}] x {self.n_points}"


@dataclass(frozen=True, eq=False)
class TriangularField:
    """Samples k(t_i, t_j) for i >= j; the strict upper triangle is held at zero"""
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        n = self.grid.n_points
        if self.values.shape != (n, n):
            raise ValueError(f"Field shape {self.values.shape} does not match {self.grid}")
        object.__setattr__(self, "values", _frozen_array(np.tril(self.values)))

    @property
    def dtype(self):
        return self.values.dtype

    def __getitem__(self, index):
        i, j = index
        if i < j:
            raise IndexError(f"({i}, {j}) lies above the diagonal")
        return self.values[i, j]


@dataclass(frozen=True, eq=False)
class GeneralizedKernel:
    """c*delta(t' - t) + k(t', t)*Theta(t' - t) with constant c"""
    delta_coeff: Scalar
    smooth: TriangularField

    @property
    def grid(self) -> Grid:
        return self.smooth.grid

    @property
    def values(self) -> np.ndarray:
        return self.smooth.values

    @property
    def is_delta_free(self) -> bool:
        return self.delta_coeff == 0

    @property
    def is_identity(self) -> bool:
        return self.delta_coeff == 1 and not np.any(self.smooth.values)

    @property
    def is_zero(self) -> bool:
        return self.delta_coeff == 0 and not np.any(self.smooth.values)

    def at(self, i: int, j: int) -> Scalar:
        """Smooth part at (t_i, t_j)"""
        return self.smooth[i, j]

    def __repr__(self) -> str:
        return f"GeneralizedKernel(delta={self.delta_coeff!r}, {self.grid}, dtype={self.smooth.dtype})"


@dataclass(frozen=True, eq=False)
class OneVariableFunction:
    grid: Grid
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        samples = np.asarray(self.samples)
        if samples.shape != (self.grid.n_points,):
            raise ValueError(
                f"Samples have shape {samples.shape}, expected ({self.grid.n_points},)"
            )
        object.__setattr__(self, "samples", _frozen_array(samples))

    def __call__(self, index: int) -> Scalar:
        return self.samples[index]

    def __len__(self) -> int:
        return self.samples.shape[0]
