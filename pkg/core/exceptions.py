from typing import Any, Iterable, Optional, Tuple


class VolterraError(ValueError):
    """Base class for solver errors; a ValueError so callers can keep catching that"""


class GridMismatchError(VolterraError):
    pass


class KernelEvaluationError(VolterraError):
    def __init__(self, message: str, node: Optional[Tuple[float, ...]] = None):
        self.node = node
        if node is not None:
            coords = ", ".join(f"{x:.6g}" for x in node)
            message = f"{message} at node ({coords})"
        super().__init__(message)


class ExprSyntaxError(VolterraError):
    def __init__(self, message: str, offset: int, expected: Iterable[str] = ()):
        self.offset = offset
        self.expected = tuple(sorted(set(expected)))
        detail = f"{message} at offset {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)


class ExprEvaluationError(VolterraError):
    def __init__(self, message: str, subexpression: str = ""):
        self.subexpression = subexpression
        if subexpression:
            message = f"{message} in '{subexpression}'"
        super().__init__(message)


class ProblemValidationError(VolterraError):
    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class ConvergenceError(VolterraError):
    def __init__(self, message: str, partial: Any = None):
        self.partial = partial
        super().__init__(message)


class AlgebraInvariantError(AssertionError):
    """An identity that holds exactly in the algebra was violated numerically"""
