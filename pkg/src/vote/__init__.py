"""
Vote and robust aggregation rules.

This module provides:
- VoteBatch, soft_vote, weighted_soft_vote, plurality, signsgd_majority
- ReputationState with credibility_score, update_reputation and
  reputation_weights
- coordinate_median, krum_scores, krum_select
- one_shot_error_bound
"""

from src.vote.voting import (
    VoteBatch,
    plurality,
    signsgd_majority,
    soft_vote,
    weighted_soft_vote,
)
from src.vote.reputation import (
    ReputationState,
    credibility_score,
    reputation_weights,
    update_reputation,
)
from src.vote.robust import coordinate_median, krum_scores, krum_select
from src.vote.bounds import one_shot_error_bound

__all__ = [
    'VoteBatch',
    'plurality',
    'signsgd_majority',
    'soft_vote',
    'weighted_soft_vote',
    'ReputationState',
    'credibility_score',
    'reputation_weights',
    'update_reputation',
    'coordinate_median',
    'krum_scores',
    'krum_select',
    'one_shot_error_bound',
]
