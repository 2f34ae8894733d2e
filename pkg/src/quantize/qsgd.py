"""
QSGD quantizer with a single level (s = 1).

Each coordinate becomes ||x||_2 * sign(x_i) with probability |x_i| / ||x||_2
and 0 otherwise, which is unbiased.
"""
import logging

import numpy as np

from src.errors import InvalidArgumentError

logger = logging.getLogger(__name__)


def qsgd_quantize(x, rng: np.random.Generator) -> np.ndarray:
    """
    Quantize ``x`` to {0, +-||x||_2} per coordinate.

    A 2-D input is treated as a stack of vectors, each quantized with its
    own row norm.

    Args:
        x: Real vector, or a matrix of row vectors
        rng: Random generator supplying one uniform draw per entry

    Returns:
        Quantized array of the same shape; all-zero rows stay zero

    Raises:
        InvalidArgumentError: If x is not 1-D or 2-D, or contains non-finite values
    """
    x = np.asarray(x, dtype=float)
    if x.ndim not in (1, 2):
        raise InvalidArgumentError(f"qsgd_quantize expects a vector or a matrix of rows, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("qsgd_quantize: non-finite input")
    norm = np.linalg.norm(x, axis=-1, keepdims=True)
    u = rng.random(x.shape)
    safe = np.where(norm > 0.0, norm, 1.0)
    keep = u < np.abs(x) / safe
    return np.where(keep, norm * np.sign(x), 0.0)
