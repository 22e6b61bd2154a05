from typing import Tuple

import numpy as np

from core.exceptions import GridMismatchError, KernelEvaluationError


def ensure_same_grid(*grids) -> None:
    """All operands of a product must live on one grid"""
    first = grids[0]
    for other in grids[1:]:
        if other != first:
            raise GridMismatchError(f"Grid mismatch: {first} vs {other}")


def ensure_length(values: np.ndarray, n_points: int, what: str = "samples") -> None:
    if values.ndim != 1 or values.shape[0] != n_points:
        raise GridMismatchError(
            f"{what} have shape {values.shape}, expected ({n_points},)"
        )


def first_non_finite(values: np.ndarray) -> Tuple[int, ...]:
    """Index of the first NaN/Inf entry, or an empty tuple when all are finite"""
    bad = np.argwhere(~np.isfinite(values))
    if bad.size == 0:
        return ()
    return tuple(int(x) for x in bad[0])


def ensure_finite_field(values: np.ndarray, nodes: np.ndarray, what: str = "kernel") -> None:
    """Reject NaN/Inf on the lower triangle, reporting the node coordinates"""
    masked = np.where(np.tri(values.shape[0], dtype=bool), values, 0)
    index = first_non_finite(masked)
    if index:
        i, j = index
        raise KernelEvaluationError(f"Non-finite {what} value", node=(nodes[i], nodes[j]))


def ensure_finite_samples(values: np.ndarray, nodes: np.ndarray, what: str = "function") -> None:
    index = first_non_finite(values)
    if index:
        raise KernelEvaluationError(f"Non-finite {what} value", node=(nodes[index[0]],))
