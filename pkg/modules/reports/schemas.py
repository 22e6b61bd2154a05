from pydantic import BaseModel, Field, validator
from typing import Any, Dict, List, Optional

from modules.resolvents.schemas import SolveReport

SUBCOMMANDS = ('solve', 'convergence', 'verify', 'example')
FORMATS = ('csv', 'json')


class RunConfig(BaseModel):
    subcommand: str
    input: Optional[str] = None
    out: str
    formats: List[str] = ['csv', 'json']
    stride: int = Field(1, ge=1, description="Write every stride-th node pair of the solution")
    deterministic: bool = Field(True, description="Outputs carry no timings or run-dependent data")

    @validator('subcommand')
    def validate_subcommand(cls, v):
        if v not in SUBCOMMANDS:
            raise ValueError(f'subcommand must be one of {", ".join(SUBCOMMANDS)}')
        return v

    @validator('formats', pre=True)
    def validate_formats(cls, v):
        if isinstance(v, str):
            v = [part.strip() for part in v.split(',') if part.strip()]
        unknown = [f for f in v if f not in FORMATS]
        if unknown or not v:
            raise ValueError(f'formats must be a non-empty subset of {", ".join(FORMATS)}')
        return list(dict.fromkeys(v))

    @validator('deterministic')
    def validate_deterministic(cls, v):
        if not v:
            raise ValueError('runs are always deterministic')
        return v

    def wants(self, fmt: str) -> bool:
        return fmt in self.formats


class RunSummary(BaseModel):
    subcommand: str
    problem: Optional[str] = None
    converged: bool
    reports: List[SolveReport] = []
    settings: Dict[str, Any] = {}


class VerifyCheck(BaseModel):
    name: str
    problem: str
    status: str = Field(..., description="'pass', 'fail' or 'n/a'")
    measured: Optional[float] = None
    threshold: Optional[float] = None
    slack: Optional[float] = Field(None, description="threshold - measured")
    detail: str = ""

    @validator('status')
    def validate_status(cls, v):
        if v not in ['pass', 'fail', 'n/a']:
            raise ValueError('status must be "pass", "fail" or "n/a"')
        return v


class VerifyReport(BaseModel):
    checks: List[VerifyCheck]
    passed: bool
    settings: Dict[str, Any] = {}


class ExampleSummary(BaseModel):
    name: str
    summary: Dict[str, Any]
    settings: Dict[str, Any] = {}
