"""
Byzantine attack models.

This module provides:
- AttackKind, AttackPlan: attack selection and attacker sampling
- inverse_sign, omniscient_opposite, random_perturbation: payload attacks
- poison_labels: data attack
- PayloadStatistics: honest statistics for Gaussian perturbation
"""

from src.adversary.attacks import (
    AttackKind,
    AttackPlan,
    PayloadStatistics,
    inverse_sign,
    omniscient_opposite,
    poison_labels,
    random_perturbation,
)

__all__ = [
    'AttackKind',
    'AttackPlan',
    'PayloadStatistics',
    'inverse_sign',
    'omniscient_opposite',
    'poison_labels',
    'random_perturbation',
]
