from pydantic import BaseModel, Field, validator

from .models import Grid


class GridSpec(BaseModel):
    t_min: float = Field(0.0, description="Left endpoint T")
    t_max: float = Field(1.0, description="Right endpoint T'")
    n: int = Field(..., ge=2, description="Number of nodes")

    @validator('t_max')
    def validate_interval(cls, v, values):
        t_min = values.get('t_min')
        if t_min is not None and not v > t_min:
            raise ValueError(f't_max must exceed t_min ({t_min})')
        return v

    def to_grid(self) -> Grid:
        return Grid(self.t_min, self.t_max, self.n)

    class Config:
        extra = 'forbid'


class KernelSummary(BaseModel):
    delta_coeff_re: float
    delta_coeff_im: float = 0.0
    sup_norm: float
    n_points: int
