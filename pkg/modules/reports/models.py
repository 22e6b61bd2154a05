from dataclasses import dataclass
from typing import List, Optional

from modules.resolvents.models import SumKernel
from modules.star_core.models import GeneralizedKernel


@dataclass(frozen=True, eq=False)
class VerifyCase:
    """One sum-kernel problem the invariant suite is run on"""
    name: str
    sum_kernel: SumKernel
    g: GeneralizedKernel
    product_order: Optional[List[int]] = None

    @property
    def d(self) -> int:
        return self.sum_kernel.d


@dataclass(frozen=True, eq=False)
class ConvergenceTable:
    header: List[str]
    rows: List[List[float]]
    comments: List[str]
