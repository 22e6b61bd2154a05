from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from modules.resolvents.models import SumKernel
from modules.star_core.models import GeneralizedKernel, Grid


class Expr:
    """Base of the expression tree; nodes are immutable and hashable"""


@dataclass(frozen=True)
class Number(Expr):
    value: float


@dataclass(frozen=True)
class Imaginary(Expr):
    pass


@dataclass(frozen=True)
class Name(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr


VARIABLES = ("t", "tp")


@dataclass(frozen=True, eq=False)
class Problem:
    """A problem file turned into grid objects, ready for the solvers"""
    grid: Grid
    field: str
    dtype: Any
    g: GeneralizedKernel
    sum_kernel: SumKernel
    method: str
    n_orders: int
    abs_tol: Optional[float]
    rel_tol: Optional[float]
    product_order: Optional[list]
    params: Dict[str, float]
    source: Optional[str] = None

    @property
    def is_complex(self) -> bool:
        return np.dtype(self.dtype).kind == "c"
