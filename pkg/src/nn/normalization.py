"""
Range-normalization functions mapping latent weights into (-1, 1).

This module provides:
- NormalizationFamily: the supported function families
- NormalizationFn: a family plus its shape parameter, with forward,
  inverse and derivative evaluation
- normalize / normalize_inverse: the operations used by training and
  by the server's latent reconstruction
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Tuple, Union

import numpy as np
from scipy import special

from src.errors import DomainError, InvalidArgumentError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# Largest float64 below 1; saturated tanh/erf outputs are pulled back to it
_W_LIMIT = float(np.nextafter(1.0, 0.0))


class NormalizationFamily(Enum):
    """
    Supported normalization families.

    Attributes:
        TANH: phi(x) = tanh(a x)
        ERF: phi(x) = erf(a x)
        IDENTITY: phi(x) = x, used by the real-valued baselines (unbounded)
    """
    TANH = "tanh"
    ERF = "erf"
    IDENTITY = "identity"


@dataclass(frozen=True)
class NormalizationFn:
    """
    Normalization function phi with shape parameter ``a``.

    Attributes:
        family: Function family
        a: Positive, dimensionless slope parameter (ignored by IDENTITY)
    """

    family: NormalizationFamily = NormalizationFamily.TANH
    a: float = 1.5

    def __post_init__(self):
        if not isinstance(self.family, NormalizationFamily):
            raise InvalidArgumentError(f"unknown normalization family: {self.family!r}")
        if not np.isfinite(self.a) or self.a <= 0:
            raise InvalidArgumentError(f"shape parameter a must be positive, got {self.a}")

    @property
    def is_bounded(self) -> bool:
        return self.family is not NormalizationFamily.IDENTITY

    def forward(self, h: ArrayLike) -> ArrayLike:
        """phi(h), elementwise; bounded families stay strictly inside (-1, 1)."""
        if self.family is NormalizationFamily.TANH:
            return np.clip(np.tanh(self.a * h), -_W_LIMIT, _W_LIMIT)
        if self.family is NormalizationFamily.ERF:
            return np.clip(special.erf(self.a * h), -_W_LIMIT, _W_LIMIT)
        return np.asarray(h, dtype=float) * 1.0

    def inverse(self, w: ArrayLike) -> ArrayLike:
        """
        Evaluate phi^-1.

        Raises:
            DomainError: If a bounded family receives |w| >= 1
        """
        w_arr = np.asarray(w, dtype=float)
        if not np.all(np.isfinite(w_arr)):
            raise DomainError("normalize_inverse: non-finite input")
        if self.family is NormalizationFamily.IDENTITY:
            return w_arr * 1.0
        if np.any(np.abs(w_arr) >= 1.0):
            raise DomainError("normalize_inverse: |w| must be < 1 for a bounded normalization")
        if self.family is NormalizationFamily.TANH:
            return np.arctanh(w_arr) / self.a
        return special.erfinv(w_arr) / self.a

    def derivative(self, h: ArrayLike) -> ArrayLike:
        """phi'(h), elementwise."""
        h_arr = np.asarray(h, dtype=float)
        if self.family is NormalizationFamily.TANH:
            t = np.tanh(self.a * h_arr)
            return self.a * (1.0 - t * t)
        if self.family is NormalizationFamily.ERF:
            return self.a * (2.0 / np.sqrt(np.pi)) * np.exp(-(self.a * h_arr) ** 2)
        return np.ones_like(h_arr)

    def derivative_bounds(self, p_max: float) -> Tuple[float, float]:
        """
        Derivative bounds (c1, c2) over the working interval [-h_B, h_B].

        h_B is the largest latent magnitude reachable after clipping the soft
        vote at ``p_max``; c2 = phi'(0) and c1 = phi'(h_B). Diagnostic only.

        Args:
            p_max: Upper clipping threshold, in (0.5, 1)

        Returns:
            Tuple (c1, c2)
        """
        if not 0.5 < p_max < 1.0:
            raise DomainError(f"p_max must lie in (0.5, 1), got {p_max}")
        h_bound = abs(float(self.inverse(2.0 * p_max - 1.0)))
        return float(self.derivative(h_bound)), float(self.derivative(0.0))


def _as_values(h) -> np.ndarray:
    # accepts LatentWeights or a bare array
    values = getattr(h, "values", h)
    return np.asarray(values, dtype=float)


def normalize(h, phi: NormalizationFn) -> np.ndarray:
    """
    Compute the normalized weights w~ = phi(h), elementwise.

    Args:
        h: LatentWeights or real vector
        phi: Normalization function

    Returns:
        Real vector of the same length, strictly inside (-1, 1) for bounded phi

    Raises:
        InvalidArgumentError: If h contains non-finite values
    """
    values = _as_values(h)
    if not np.all(np.isfinite(values)):
        raise InvalidArgumentError("normalize: latent weights must be finite")
    return phi.forward(values)


def normalize_inverse(w_tilde: ArrayLike, phi: NormalizationFn) -> ArrayLike:
    """Inverse normalization; raises DomainError for |w~| >= 1."""
    result = phi.inverse(w_tilde)
    if np.ndim(w_tilde) == 0:
        return float(result)
    return result
