from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from core.quadrature import cumulative
from modules.star_core.models import GeneralizedKernel, Grid, OneVariableFunction, TriangularField
from utils.validators import ensure_same_grid

from .schemas import ComponentInfo


@dataclass(frozen=True, eq=False)
class SeparableComponent:
    """K(t', t) = a(t') b(t) with alpha the cumulative integral of a*b from t_min"""
    a: OneVariableFunction
    b: OneVariableFunction
    alpha: OneVariableFunction = field(init=False, repr=False)

    def __post_init__(self):
        ensure_same_grid(self.a.grid, self.b.grid)
        diagonal = self.a.samples * self.b.samples
        object.__setattr__(self, "alpha", OneVariableFunction(self.a.grid, cumulative(diagonal, self.a.grid.h)))

    @property
    def grid(self) -> Grid:
        return self.a.grid

    @property
    def values(self) -> np.ndarray:
        return np.tril(np.outer(self.a.samples, self.b.samples))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.a.samples) or not np.any(self.b.samples)

    def to_kernel(self) -> GeneralizedKernel:
        return GeneralizedKernel(0, TriangularField(self.grid, self.values))


Component = Union[SeparableComponent, GeneralizedKernel]


def component_kind(component: Component) -> str:
    return "separable" if isinstance(component, SeparableComponent) else "numeric"


def component_kernel(component: Component) -> GeneralizedKernel:
    if isinstance(component, SeparableComponent):
        return component.to_kernel()
    return component


def component_is_zero(component: Component) -> bool:
    if isinstance(component, SeparableComponent):
        return component.is_zero
    return not np.any(component.values)


@dataclass(frozen=True, eq=False)
class SumKernel:
    """K = K_1 + ... + K_d over one grid"""
    grid: Grid
    components: Tuple[Component, ...]

    def __post_init__(self):
        components = tuple(self.components)
        if not components:
            raise ValueError("A sum kernel needs at least one component")
        ensure_same_grid(self.grid, *(c.grid for c in components))
        for index, c in enumerate(components):
            if isinstance(c, GeneralizedKernel) and c.delta_coeff != 0:
                raise ValueError(f"Component {index} carries a delta part; kernels must be delta-free")
        object.__setattr__(self, "components", components)

    @classmethod
    def of(cls, *components: Component) -> "SumKernel":
        return cls(components[0].grid, tuple(components))

    @classmethod
    def uniform_split(cls, kernel: GeneralizedKernel, d: int) -> "SumKernel":
        """K as d identical numeric copies K/d"""
        if d < 1:
            raise ValueError(f"Split count must be >= 1, got {d}")
        share = GeneralizedKernel(0, TriangularField(kernel.grid, kernel.values / d))
        return cls(kernel.grid, tuple(share for _ in range(d)))

    @property
    def d(self) -> int:
        return len(self.components)

    def total(self) -> GeneralizedKernel:
        """Materialize K as a delta-free kernel"""
        values = sum(np.asarray(component_kernel(c).values) for c in self.components)
        return GeneralizedKernel(0, TriangularField(self.grid, values))

    def active_indices(self) -> List[int]:
        """Indices of components that are not identically zero"""
        return [index for index, c in enumerate(self.components) if not component_is_zero(c)]

    def default_order(self) -> List[int]:
        """Left-to-right factor order R_d * ... * R_1"""
        return list(range(self.d - 1, -1, -1))

    def normalize_order(self, order: Optional[Sequence[int]]) -> List[int]:
        if order is None:
            return self.default_order()
        order = [int(x) for x in order]
        if sorted(order) != list(range(self.d)):
            raise ValueError(f"Product order {order} is not a permutation of 0..{self.d - 1}")
        return order


@dataclass(frozen=True, eq=False)
class NeumannResult:
    """Partial sum of a Neumann series with its stopping diagnostics"""
    kernel: GeneralizedKernel
    terms: int
    last_term_norm: float
    converged: bool


@dataclass(frozen=True, eq=False)
class ResummationPlan:
    """Everything solve_resummed needs that does not depend on g"""
    sum_kernel: SumKernel
    product_order: List[int]
    resolvent_product: GeneralizedKernel
    T: GeneralizedKernel
    components: List[ComponentInfo]
    component_resolvents: List[GeneralizedKernel]

    @property
    def T_is_zero(self) -> bool:
        return not np.any(self.T.values)
