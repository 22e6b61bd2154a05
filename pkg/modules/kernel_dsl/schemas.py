from pydantic import BaseModel, Field, root_validator, validator
from typing import Dict, List, Optional, Union

from config.settings import settings
from modules.star_core.schemas import GridSpec


class InhomogeneitySpec(BaseModel):
    delta: float = Field(1.0, description="Constant delta coefficient of g")
    smooth: str = Field("0", description="Two-variable expression in t and tp")

    class Config:
        extra = 'forbid'


class SeparableSpec(BaseModel):
    a: str = Field(..., description="a(t'), written in tp (or t)")
    b: str = Field(..., description="b(t), written in t (or tp)")

    class Config:
        extra = 'forbid'


class NumericSpec(BaseModel):
    k: str = Field(..., description="Two-variable kernel in t and tp")

    class Config:
        extra = 'forbid'


class ComponentSpec(BaseModel):
    separable: Optional[SeparableSpec] = None
    numeric: Optional[NumericSpec] = None
    builtin: Optional[str] = None
    args: Dict[str, Union[float, str]] = {}

    @root_validator(pre=True)
    def validate_kind(cls, values):
        kinds = [k for k in ('separable', 'numeric', 'builtin') if values.get(k) is not None]
        if len(kinds) != 1:
            raise ValueError("A component needs exactly one of 'separable', 'numeric' or 'builtin'")
        if values.get('args') and kinds[0] != 'builtin':
            raise ValueError("'args' is only valid for builtin components")
        return values

    @property
    def kind(self) -> str:
        if self.separable is not None:
            return 'separable'
        if self.numeric is not None:
            return 'numeric'
        return 'builtin'

    class Config:
        extra = 'forbid'


class SolverSpec(BaseModel):
    orders: int = Field(settings.DEFAULT_ORDERS, ge=1, description="Number of series orders")
    abs_tol: Optional[float] = Field(None, ge=0)
    rel_tol: Optional[float] = Field(None, ge=0)
    method: str = Field('resummed', description="'neumann', 'resummed' or 'both'")
    order: Optional[List[int]] = Field(None, description="Left-to-right resolvent product order")

    @validator('method')
    def validate_method(cls, v):
        if v not in ['neumann', 'resummed', 'both']:
            raise ValueError('method must be "neumann", "resummed" or "both"')
        return v

    class Config:
        extra = 'forbid'


class ProblemSpec(BaseModel):
    grid: GridSpec
    field: str = 'complex'
    g: InhomogeneitySpec = InhomogeneitySpec()
    components: List[ComponentSpec] = Field(..., min_length=1)
    solver: SolverSpec = SolverSpec()
    params: Dict[str, float] = {}

    @validator('field')
    def validate_field(cls, v):
        if v not in ['real', 'complex']:
            raise ValueError('field must be "real" or "complex"')
        return v

    class Config:
        extra = 'forbid'
