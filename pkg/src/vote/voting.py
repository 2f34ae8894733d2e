"""
Vote aggregation rules over quantized client payloads.

This module provides:
- VoteBatch: immutable M x d matrix of client votes
- soft_vote / weighted_soft_vote: empirical (+1) probability per coordinate
- plurality: most-voted level per coordinate, ties broken at random
- signsgd_majority: plurality entry point for gradient signs
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from src.errors import InvalidArgumentError
from src.quantize.rounding import QuantizedWeights, QuantLevels

logger = logging.getLogger(__name__)

WEIGHT_SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class VoteBatch:
    """
    Votes of M clients over d coordinates.

    Attributes:
        levels: Level set shared by every row
        votes: Read-only int8 matrix (M x d)
        client_ids: Client id of each row
    """

    levels: QuantLevels
    votes: np.ndarray
    client_ids: Tuple[int, ...]

    def __post_init__(self):
        votes = np.array(self.votes, dtype=np.int8, copy=True)
        if votes.ndim != 2 or votes.shape[0] < 1:
            raise InvalidArgumentError("vote batch must contain at least one client")
        if not np.all(np.isin(votes, self.levels.allowed)):
            raise InvalidArgumentError(f"votes outside the {self.levels.value} level set")
        if len(self.client_ids) != votes.shape[0]:
            raise InvalidArgumentError(
                f"{len(self.client_ids)} client ids for {votes.shape[0]} vote rows"
            )
        votes.setflags(write=False)
        object.__setattr__(self, "votes", votes)
        object.__setattr__(self, "client_ids", tuple(int(c) for c in self.client_ids))

    @property
    def M(self) -> int:
        return int(self.votes.shape[0])

    @property
    def d(self) -> int:
        return int(self.votes.shape[1])

    @classmethod
    def from_payloads(cls, payloads: Sequence[QuantizedWeights],
                      client_ids: Optional[Sequence[int]] = None) -> "VoteBatch":
        """
        Stack client payloads into a batch.

        Raises:
            InvalidArgumentError: On an empty list, mixed level sets or lengths
        """
        if not payloads:
            raise InvalidArgumentError("vote batch must contain at least one client")
        levels = payloads[0].levels
        if any(p.levels is not levels for p in payloads):
            raise InvalidArgumentError("all votes in a batch must share one level set")
        if len({p.d for p in payloads}) != 1:
            raise InvalidArgumentError("all votes in a batch must have the same length")
        ids = tuple(client_ids) if client_ids is not None else tuple(range(len(payloads)))
        return cls(levels=levels, votes=np.stack([p.values for p in payloads]), client_ids=ids)

    def row(self, index: int) -> QuantizedWeights:
        return QuantizedWeights(self.levels, self.votes[index])


def soft_vote(votes: VoteBatch) -> np.ndarray:
    """
    Per-coordinate soft vote.

    Binary votes give the exact fraction of +1 votes. Ternary votes give
    (1 + mean vote) / 2, so that 2p - 1 is the mean vote in both cases.
    """
    if votes.levels is QuantLevels.BINARY:
        return np.count_nonzero(votes.votes == 1, axis=0) / votes.M
    return (votes.M + votes.votes.sum(axis=0, dtype=np.int64)) / (2.0 * votes.M)


def weighted_soft_vote(votes: VoteBatch, weights) -> np.ndarray:
    """
    Soft vote with per-client weights lambda.

    Args:
        votes: Vote batch
        weights: Non-negative weights, one per client, summing to 1

    Returns:
        Probability vector in [0, 1]; identical to :func:`soft_vote` when the
        weights are uniform

    Raises:
        InvalidArgumentError: On wrong length, negative weights or a sum != 1
    """
    lam = np.asarray(weights, dtype=float)
    if lam.shape != (votes.M,):
        raise InvalidArgumentError(f"expected {votes.M} weights, got shape {lam.shape}")
    if np.any(lam < 0) or not np.all(np.isfinite(lam)):
        raise InvalidArgumentError("vote weights must be finite and non-negative")
    if abs(lam.sum() - 1.0) > WEIGHT_SUM_TOLERANCE:
        raise InvalidArgumentError(f"vote weights must sum to 1, got {lam.sum():.12g}")
    if np.all(lam == lam[0]):
        return soft_vote(votes)
    if votes.levels is QuantLevels.BINARY:
        p = lam @ (votes.votes == 1).astype(float)
    else:
        p = (1.0 + lam @ votes.votes.astype(float)) / 2.0
    return np.clip(p, 0.0, 1.0)


def plurality(votes: VoteBatch, rng: np.random.Generator) -> QuantizedWeights:
    """
    Most-voted level per coordinate.

    Binary: sign of the vote sum, ties broken uniformly. Ternary: argmax of
    the per-level counts, ties broken uniformly among the tied levels.
    """
    if votes.levels is QuantLevels.BINARY:
        total = votes.votes.sum(axis=0, dtype=np.int64)
        result = np.sign(total).astype(np.int8)
        ties = np.flatnonzero(total == 0)
        if ties.size:
            result[ties] = np.where(rng.integers(0, 2, size=ties.size) == 1, 1, -1)
            logger.debug(f"plurality: broke {ties.size} ties")
        return QuantizedWeights(votes.levels, result)

    levels = votes.levels.allowed
    counts = np.stack([np.count_nonzero(votes.votes == level, axis=0) for level in levels])
    tied = counts == counts.max(axis=0)
    scores = np.where(tied, rng.random(counts.shape), -1.0)
    return QuantizedWeights(votes.levels, levels[np.argmax(scores, axis=0)])


def signsgd_majority(grad_signs, rng: np.random.Generator) -> np.ndarray:
    """
    Majority vote over gradient signs (M x d matrix over {-1, +1}).

    Returns:
        int8 sign vector of length d
    """
    signs = np.asarray(grad_signs)
    if signs.ndim != 2 or signs.shape[0] < 1:
        raise InvalidArgumentError("signSGD majority needs at least one sign vector")
    if not np.all(np.isin(signs, (-1, 1))):
        raise InvalidArgumentError("gradient signs must be -1 or +1")
    batch = VoteBatch(QuantLevels.BINARY, signs, tuple(range(signs.shape[0])))
    return plurality(batch, rng).values.copy()
