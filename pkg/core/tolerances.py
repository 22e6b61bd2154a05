"""Quadrature tolerance model shared by solvers, checks and tests."""


def quadrature_tolerance(h: float, length: float, solution_scale: float = 1.0, kernel_scale: float = 0.0) -> float:
    """
    Absolute tolerance tau_q for comparing solution-scale fields computed on a
    grid of step h over an interval of the given length. Trapezoid errors are
    O(h^2) and grow with the solution magnitude and with C_K*|I|.
    """
    ratio = h / length
    return ratio * ratio * max(1.0, abs(solution_scale)) * max(1.0, abs(kernel_scale) * length) ** 2


def relative_slack(h: float, length: float, kernel_scale: float = 0.0) -> float:
    """Relative slack eps_q absorbed into bound checks"""
    ratio = h / length
    return 10.0 * ratio * ratio * max(1.0, abs(kernel_scale) * length) ** 3
