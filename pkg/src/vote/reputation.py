"""
Reputation tracking for reputation-weighted voting.

Each client's credibility is the fraction of coordinates on which it agreed
with the round's plurality result; an exponential moving average of it
gives the client's weight in the next round's soft vote.
"""
import logging
from dataclasses import dataclass

import numpy as np

from src.errors import DegenerateStateError, InvalidArgumentError
from src.quantize.rounding import QuantizedWeights

logger = logging.getLogger(__name__)

DEFAULT_BETA = 0.5


@dataclass(frozen=True)
class ReputationState:
    """
    EMA credibility per client.

    Attributes:
        nu: Credibility of each client, entries in [0, 1]
        beta: EMA decay in (0, 1)
    """

    nu: np.ndarray
    beta: float = DEFAULT_BETA

    def __post_init__(self):
        nu = np.array(self.nu, dtype=float, copy=True)
        if nu.ndim != 1 or nu.size < 1:
            raise InvalidArgumentError("reputation needs one entry per client")
        if not np.all(np.isfinite(nu)) or np.any(nu < 0.0) or np.any(nu > 1.0):
            raise InvalidArgumentError("reputation entries must lie in [0, 1]")
        if not 0.0 < self.beta < 1.0:
            raise InvalidArgumentError(f"beta must lie in (0, 1), got {self.beta}")
        nu.setflags(write=False)
        object.__setattr__(self, "nu", nu)

    @classmethod
    def initial(cls, client_count: int, beta: float = DEFAULT_BETA) -> "ReputationState":
        """All clients equally credible, normalized to sum to 1."""
        if client_count < 1:
            raise InvalidArgumentError("reputation needs at least one client")
        return cls(nu=np.full(client_count, 1.0 / client_count), beta=beta)


def _as_vector(weights) -> np.ndarray:
    return np.asarray(getattr(weights, "values", weights))


def credibility_score(client_votes, global_result) -> float:
    """
    Fraction of coordinates where the client's vote equals the global result.

    Raises:
        InvalidArgumentError: If the vectors differ in length
    """
    a = _as_vector(client_votes)
    b = _as_vector(global_result)
    if a.shape != b.shape or a.ndim != 1 or a.size == 0:
        raise InvalidArgumentError(f"credibility_score: length mismatch {a.shape} vs {b.shape}")
    return float(np.mean(a == b))


def update_reputation(state: ReputationState, scores) -> ReputationState:
    """nu <- beta * nu + (1 - beta) * scores, elementwise."""
    scores = np.asarray(scores, dtype=float)
    if scores.shape != state.nu.shape:
        raise InvalidArgumentError(
            f"expected {state.nu.size} credibility scores, got shape {scores.shape}"
        )
    if np.any(scores < 0.0) or np.any(scores > 1.0):
        raise InvalidArgumentError("credibility scores must lie in [0, 1]")
    nu = state.beta * state.nu + (1.0 - state.beta) * scores
    return ReputationState(nu=np.clip(nu, 0.0, 1.0), beta=state.beta)


def reputation_weights(state: ReputationState) -> np.ndarray:
    """
    Normalized vote weights lambda = nu / sum(nu).

    Raises:
        DegenerateStateError: If every credibility is zero
    """
    total = float(state.nu.sum())
    if total <= 0.0:
        raise DegenerateStateError("all client reputations are zero")
    return state.nu / total
