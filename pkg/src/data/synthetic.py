"""
Synthetic Gaussian-blob classification data.
"""
import logging

import numpy as np

from src.data.dataset import DatasetShard
from src.errors import InvalidArgumentError

logger = logging.getLogger(__name__)


def _centroids(input_dim: int, class_count: int, separation: float) -> np.ndarray:
    if input_dim >= class_count:
        # scaled basis vectors: every pair is exactly `separation` apart
        return np.eye(class_count, input_dim) * (separation / np.sqrt(2.0))
    centroids = np.zeros((class_count, input_dim))
    if input_dim == 1:
        centroids[:, 0] = (np.arange(class_count) - (class_count - 1) / 2.0) * separation
        return centroids
    # regular polygon in the first two axes with side length `separation`
    radius = separation / (2.0 * np.sin(np.pi / class_count))
    angles = 2.0 * np.pi * np.arange(class_count) / class_count
    centroids[:, 0] = radius * np.cos(angles)
    centroids[:, 1] = radius * np.sin(angles)
    return centroids


def _random_rotation(input_dim: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(input_dim, input_dim)))
    return q * np.sign(np.diag(r))


def synthetic_classification(n: int, input_dim: int, class_count: int, separation: float,
                             rng: np.random.Generator, noise_std: float = 1.0) -> DatasetShard:
    """
    Gaussian blobs with one randomly rotated centroid per class.

    Centroids are pairwise at least ``separation`` apart and classes are
    balanced to within one sample.

    Args:
        n: Number of samples (>= class_count)
        input_dim: Feature dimension
        class_count: Number of classes C (>= 2)
        separation: Minimum centroid distance (> 0)
        rng: Random generator
        noise_std: Standard deviation of the isotropic noise

    Raises:
        InvalidArgumentError: On invalid sizes or non-positive separation
    """
    if class_count < 2 or input_dim < 1 or n < class_count:
        raise InvalidArgumentError(
            f"synthetic data needs C >= 2, d_in >= 1 and n >= C (got n={n}, d_in={input_dim}, C={class_count})"
        )
    if not separation > 0 or not noise_std > 0:
        raise InvalidArgumentError("separation and noise_std must be positive")

    centroids = _centroids(input_dim, class_count, separation) @ _random_rotation(input_dim, rng).T
    labels = rng.permutation(np.arange(n) % class_count)
    inputs = centroids[labels] + noise_std * rng.normal(size=(n, input_dim))
    logger.debug(f"synthetic_classification: n={n}, d_in={input_dim}, C={class_count}, sep={separation}")
    return DatasetShard(inputs, labels, class_count)
