"""
Byzantine-robust aggregation baselines over real-valued client updates.
"""
import logging

import numpy as np

from src.errors import InvalidArgumentError

logger = logging.getLogger(__name__)


def _update_matrix(updates) -> np.ndarray:
    matrix = np.asarray(updates, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] < 1:
        raise InvalidArgumentError("aggregation needs a non-empty M x d update matrix")
    return matrix


def coordinate_median(updates) -> np.ndarray:
    """Per-coordinate median; an even client count averages the middle two."""
    return np.median(_update_matrix(updates), axis=0)


def krum_scores(updates, f: int) -> np.ndarray:
    """
    Krum score of every row: sum of squared distances to its M - f - 2
    nearest other rows.

    Raises:
        InvalidArgumentError: If M < f + 3
    """
    matrix = _update_matrix(updates)
    m = matrix.shape[0]
    if f < 0 or m < f + 3:
        raise InvalidArgumentError(f"Krum needs M >= f + 3, got M={m}, f={f}")
    diffs = matrix[:, None, :] - matrix[None, :, :]
    distances = np.einsum("ijk,ijk->ij", diffs, diffs)
    neighbours = m - f - 2
    scores = np.empty(m)
    for i in range(m):
        others = np.delete(distances[i], i)
        scores[i] = np.sort(others)[:neighbours].sum()
    return scores


def krum_select(updates, f: int) -> int:
    """Index of the row with the lowest Krum score; ties go to the lowest index."""
    scores = krum_scores(updates, f)
    selected = int(np.argmin(scores))
    logger.debug(f"krum_select: row {selected} (score {scores[selected]:.6g})")
    return selected
