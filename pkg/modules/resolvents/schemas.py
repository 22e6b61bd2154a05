from pydantic import BaseModel, Field
from typing import Dict, List, Optional


class ComponentInfo(BaseModel):
    index: int
    kind: str = Field(..., description="'separable' or 'numeric'")
    method: str = Field(..., description="'closed_form', 'neumann' or 'pruned'")
    sup_norm: float
    terms: Optional[int] = None
    converged: bool = True


class OrderRecord(BaseModel):
    order: int = Field(..., description="n of the approximant f^(n)")
    term_norm: float
    defect: Optional[float] = Field(None, description="sup |f^(n) - g - K*f^(n)|")
    error: Optional[float] = Field(None, description="sup |f - f^(n)| against the converged reference")
    bound: Optional[float] = None
    identity_residual: Optional[float] = Field(None, description="sup |(f - f^(n)) - X^(n+1)*f|")


class ConvergenceConstants(BaseModel):
    C_K: float
    C_T: float
    C_f: float
    C_f_source: str = "estimated"
    delta_coeff_f: float = Field(0.0, description="|c_f|, the delta coefficient of the solution")
    interval_length: float
    tau_q: float
    eps_q: float


class LemmaCheck(BaseModel):
    index: int
    sup_resolvent: float
    bound: float
    slack: float
    passed: bool


class SolveReport(BaseModel):
    method: str = Field(..., description="'resummed' or 'neumann'")
    n_orders: int
    orders_computed: int
    converged: bool
    stagnated: bool = False
    product_order: List[int] = []
    components: List[ComponentInfo] = []
    orders: List[OrderRecord] = []
    constants: Optional[ConvergenceConstants] = None
    bounds_hold: Optional[bool] = None
    lemma_checks: List[LemmaCheck] = []
    timings: Dict[str, float] = {}
