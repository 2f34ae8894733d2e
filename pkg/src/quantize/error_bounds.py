"""
Closed-form expected quantization errors.

This module provides:
- binary_quant_error_expectation: E||Q(a) - a||^2 = d - ||a||^2
- ternary_quant_error_expectation: E||Q(a) - a||^2 = ||a||_1 - ||a||^2
- qsgd_error_expectation: ||x||_2 ||x||_1 - ||x||_2^2
- qsgd_error_bound: (sqrt(d) - 1) ||x||_2^2
"""
import numpy as np

from src.errors import DomainError, InvalidArgumentError


def _unit_box(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise InvalidArgumentError("non-finite input")
    if np.any(np.abs(a) > 1.0):
        raise DomainError("entries must satisfy |a_i| <= 1")
    return a


def binary_quant_error_expectation(a) -> float:
    """Expected squared error of binary stochastic rounding of ``a``."""
    a = _unit_box(a)
    return float(a.size - np.dot(a, a))


def ternary_quant_error_expectation(a) -> float:
    """Expected squared error of ternary stochastic rounding of ``a``."""
    a = _unit_box(a)
    return float(np.sum(np.abs(a)) - np.dot(a, a))


def _finite(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("non-finite input")
    return x


def qsgd_error_expectation(x) -> float:
    """Expected squared error of s = 1 QSGD on ``x``."""
    x = _finite(x)
    l2 = float(np.linalg.norm(x))
    return l2 * float(np.sum(np.abs(x))) - l2 * l2


def qsgd_error_bound(x) -> float:
    """Dimension-dependent upper bound on :func:`qsgd_error_expectation`."""
    x = _finite(x)
    return (np.sqrt(x.size) - 1.0) * float(np.dot(x, x))
