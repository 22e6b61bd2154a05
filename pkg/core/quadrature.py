"""
Composite trapezoid rules on lower-triangular node-pair arrays.

All two-variable arrays are square (n, n) with entry (i, j) meaning the value at
(t_i, t_j); only i >= j is meaningful and the strict upper triangle is kept at
zero. Every integral over [t_j, t_i] uses the weights h*(1/2, 1, ..., 1, 1/2)
on nodes j..i, is exactly zero for i == j and reduces to a single trapezoid for
i == j + 1.
"""
import numpy as np
from scipy.integrate import cumulative_trapezoid


def trapezoid_weights(h: float, count: int) -> np.ndarray:
    """Weights of the trapezoid rule over `count` consecutive nodes"""
    if count <= 1:
        return np.zeros(max(count, 0))
    weights = np.full(count, h)
    weights[0] = weights[-1] = 0.5 * h
    return weights


def lower(values: np.ndarray) -> np.ndarray:
    """Zero the strict upper triangle"""
    return np.tril(values)


def triangular_product(F: np.ndarray, G: np.ndarray, h: float) -> np.ndarray:
    """
    Q(i, j) = trapezoid over k = j..i of F(i, k) * G(k, j).

    With F, G lower triangular the plain matrix product sums exactly the nodes
    j..i with unit weight; the two endpoint half-weights are then removed.
    """
    full = F @ G
    endpoints = 0.5 * (F * np.diagonal(G)[np.newaxis, :] + np.diagonal(F)[:, np.newaxis] * G)
    Q = h * (full - endpoints)
    Q = np.tril(Q)
    np.fill_diagonal(Q, 0)
    return Q


def column_cumulative(F: np.ndarray, h: float) -> np.ndarray:
    """C(m, k) = trapezoid over l = k..m of F(l, k), i.e. integral down column k"""
    running = np.cumsum(F, axis=0)
    C = h * (running - 0.5 * (np.diagonal(F)[np.newaxis, :] + F))
    C = np.tril(C)
    np.fill_diagonal(C, 0)
    return C


def row_integral(G: np.ndarray, h: float) -> np.ndarray:
    """R(i, j) = trapezoid over k = j..i of G(i, k), i.e. integral along row i back to column j"""
    tail = np.cumsum(G[:, ::-1], axis=1)[:, ::-1]
    R = h * (tail - 0.5 * (G + np.diagonal(G)[:, np.newaxis]))
    R = np.tril(R)
    np.fill_diagonal(R, 0)
    return R


def cumulative(values: np.ndarray, h: float) -> np.ndarray:
    """Cumulative trapezoid integral of node samples, zero at the first node"""
    return cumulative_trapezoid(values, dx=h, initial=0)
