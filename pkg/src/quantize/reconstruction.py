"""
Soft-vote clipping and reconstruction of global latent weights.
"""
import logging
from dataclasses import dataclass

import numpy as np

from src.errors import InvalidArgumentError
from src.nn.network import LatentWeights, LayerShape
from src.nn.normalization import NormalizationFn

logger = logging.getLogger(__name__)

DEFAULT_P_MIN = 0.001
DEFAULT_P_MAX = 0.999


@dataclass(frozen=True)
class ClipBounds:
    """
    Clipping range for soft-vote probabilities.

    Attributes:
        p_min: Lower bound in (0, 0.5)
        p_max: Upper bound in (0.5, 1)
    """

    p_min: float = DEFAULT_P_MIN
    p_max: float = DEFAULT_P_MAX

    def __post_init__(self):
        if not 0.0 < self.p_min < 0.5:
            raise InvalidArgumentError(f"p_min must lie in (0, 0.5), got {self.p_min}")
        if not 0.5 < self.p_max < 1.0:
            raise InvalidArgumentError(f"p_max must lie in (0.5, 1), got {self.p_max}")

    @classmethod
    def symmetric(cls, p_min: float = DEFAULT_P_MIN) -> "ClipBounds":
        return cls(p_min=p_min, p_max=1.0 - p_min)

    def apply(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if not np.all(np.isfinite(p)) or np.any(p < 0.0) or np.any(p > 1.0):
            raise InvalidArgumentError("soft vote entries must lie in [0, 1]")
        return np.clip(p, self.p_min, self.p_max)


def reconstruct_from_soft_vote(p, clip: ClipBounds, phi: NormalizationFn, shapes=None) -> LatentWeights:
    """
    Global latent weights h = phi^-1(2 * clip(p) - 1).

    Args:
        p: Soft vote, entries in [0, 1]
        clip: Clipping bounds
        phi: Normalization function
        shapes: Optional layer layout; defaults to a single 1 x d layer

    Raises:
        InvalidArgumentError: If any p_i lies outside [0, 1]
    """
    clipped = clip.apply(p)
    values = phi.inverse(2.0 * clipped - 1.0)
    if shapes is None:
        shapes = (LayerShape(0, 1, values.size),)
    return LatentWeights(values=values, shapes=shapes)
