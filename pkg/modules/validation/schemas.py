import math
from pydantic import BaseModel, Field, validator
from typing import Dict, List, Optional

from modules.resolvents.schemas import SolveReport


class ConstantParams(BaseModel):
    a: float = 1.0
    b: float = 2.0
    n: int = Field(1601, ge=2)
    t_max: float = Field(1.0, gt=0)


class HeunParams(BaseModel):
    f1: float = 0.5
    nu: float = 0.5
    omega: float = 1.0
    horizon: float = Field(2 * math.pi, gt=0)
    n: int = Field(1601, ge=2)
    rk4_steps: int = Field(20000, ge=1)
    convention: str = 'ode'
    kernel_mode: str = 'numeric'
    include_split: bool = True

    @validator('omega')
    def validate_omega(cls, v):
        if v == 0:
            raise ValueError('omega must be non-zero')
        return v

    @validator('convention')
    def validate_convention(cls, v):
        if v not in ['ode', 'literal']:
            raise ValueError('convention must be "ode" or "literal"')
        return v

    @validator('kernel_mode')
    def validate_kernel_mode(cls, v):
        if v not in ['numeric', 'split']:
            raise ValueError('kernel_mode must be "numeric" or "split"')
        return v


class OracleDeviation(BaseModel):
    quantity: str
    solver_at_corner: float
    oracle_at_corner: float
    max_relative_deviation: float


class ConstantSummary(BaseModel):
    a: float
    b: float
    n_points: int
    deviations: List[OracleDeviation]
    max_relative_deviation: float
    report: Optional[SolveReport] = None


class HeunSummary(BaseModel):
    params: HeunParams
    sup_abs_diff: float = Field(..., description="sup_t |a_volterra - a_rk4|")
    max_abs_rk4: float
    relative_deviation: float
    tolerance: float
    passed: bool
    split_discrepancy: float = Field(..., description="sup |R - (s(t') - s(t))|")
    split_sup_abs_diff: Optional[float] = None
    parameter_map: Dict[str, List[float]]
    report: Optional[SolveReport] = None
