import math
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from modules.resolvents.schemas import SolveReport
from modules.star_core.models import Grid, OneVariableFunction, Scalar

CONVENTIONS = ("ode", "literal")
KERNEL_MODES = ("numeric", "split")


def divided_difference(a: Scalar, b: Scalar, delta):
    """(e^{a d} - e^{b d}) / (a - b), with limit d e^{a d} at a == b"""
    delta = np.asarray(delta)
    if a == b:
        return delta * np.exp(a * delta)
    return np.exp(b * delta) * np.expm1((a - b) * delta) / (a - b)


@dataclass(frozen=True)
class ConstantKernelOracle:
    """
    Closed forms for K = a Theta + b Theta with g = 1_*, as functions of
    d = t' - t. f1 is the order-two resummed approximant P + T + T*P.
    """
    a: float
    b: float

    # below this |a - b| d the f1 quotient is replaced by its value at the midpoint
    LIMIT_THRESHOLD = 1e-4

    def exact(self, delta):
        s = self.a + self.b
        return s * np.exp(s * np.asarray(delta))

    def f0(self, delta):
        a, b = self.a, self.b
        return a * a * divided_difference(a, b, delta) + (a + b) * np.exp(b * np.asarray(delta))

    def T(self, delta):
        return self.a * self.b * divided_difference(self.a, self.b, delta)

    def f1(self, delta):
        a, b = self.a, self.b
        delta = np.asarray(delta)
        head = (a + b) * (a * divided_difference(a, b, delta) + np.exp(b * delta))
        return head + self._T_star_P(delta)

    def _T_star_P(self, delta):
        a, b = self.a, self.b
        spread = abs(a - b) * float(np.max(np.abs(delta), initial=0.0))
        if a == b or spread < self.LIMIT_THRESHOLD:
            m = 0.5 * (a + b)
            return m ** 3 * delta ** 2 * np.exp(m * delta) + m ** 4 * delta ** 3 * np.exp(m * delta) / 6
        D = divided_difference(a, b, delta)
        bracket = delta * (a * a * np.exp(a * delta) + b * b * np.exp(b * delta)) - (a * a + b * b) * D
        return a * b * bracket / (a - b) ** 2


@dataclass(frozen=True)
class HeunProblem:
    """
    The driven two-level system 2i w a' = nu b + f a, 2i w b' = nu a - f b with
    f(t) = f1 sin(w t), reduced to a Volterra equation for a'.
    """
    f1: float
    nu: float
    omega: float
    grid: Grid
    convention: str = "ode"
    kernel_mode: str = "numeric"

    def __post_init__(self):
        if self.omega == 0:
            raise ValueError("omega must be non-zero")
        if self.convention not in CONVENTIONS:
            raise ValueError(f"convention must be one of {CONVENTIONS}, got '{self.convention}'")
        if self.kernel_mode not in KERNEL_MODES:
            raise ValueError(f"kernel_mode must be one of {KERNEL_MODES}, got '{self.kernel_mode}'")

    @classmethod
    def create(
        cls,
        f1: float = 0.5,
        nu: float = 0.5,
        omega: float = 1.0,
        horizon: float = 2 * math.pi,
        n_points: int = 1601,
        convention: str = "ode",
        kernel_mode: str = "numeric",
    ) -> "HeunProblem":
        if not horizon > 0:
            raise ValueError(f"horizon must be positive, got {horizon}")
        return cls(f1, nu, omega, Grid(0.0, horizon, n_points), convention, kernel_mode)

    @property
    def horizon(self) -> float:
        return self.grid.length

    @property
    def coefficients(self) -> Dict[str, complex]:
        """
        F = (1_* - kappa_F f)^{-1}, K = k1 f(t') Theta + k2 R.

        "ode" is the exact reduction of the system; "literal" keeps the
        coefficients as printed for unit frequency.
        """
        w = self.omega
        if self.convention == "ode":
            return {"kappa_F": 0.5j / w, "k1": -0.5j / w, "k2": -(self.nu ** 2) / (4 * w * w)}
        return {"kappa_F": 0.5j, "k1": -0.5j, "k2": (self.nu ** 2) / 4}

    def drive(self, t):
        return self.f1 * np.sin(self.omega * np.asarray(t))

    def parameter_map(self) -> Dict[str, complex]:
        """Confluent Heun parameters of the solution (documentation only)"""
        f1, nu, w = self.f1, self.nu, self.omega
        return {
            "alpha": 2j * f1 / w,
            "beta": -0.5,
            "gamma": -0.5,
            "delta": 1j * f1 / w,
            "eta": -0.5j * f1 / w + 3 / 8 - nu * nu / (4 * w * w),
        }


@dataclass(frozen=True, eq=False)
class HeunRun:
    a: OneVariableFunction
    report: SolveReport
    split_discrepancy: float = field(default=float("nan"))


@dataclass(frozen=True, eq=False)
class ComparisonTable:
    """Solver-versus-oracle samples written as the example CSV"""
    header: List[str]
    rows: List[List[float]]
