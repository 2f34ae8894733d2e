"""
Byzantine attack models.

This module provides:
- AttackKind / AttackPlan: which attack runs and which clients carry it out
- inverse_sign: negate a payload
- poison_labels: complement every label (y -> C - 1 - y)
- random_perturbation: payload drawn independently of the honest one
- omniscient_opposite: negation of the honest aggregate
- PayloadStatistics: honest per-coordinate mean/std for Gaussian perturbation
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import FrozenSet, Optional, Union

import numpy as np

from src.data.dataset import DatasetShard
from src.errors import ConfigurationError, InvalidArgumentError
from src.quantize.rounding import QuantizedWeights

logger = logging.getLogger(__name__)

Payload = Union[QuantizedWeights, np.ndarray]


class AttackKind(Enum):
    """
    Supported attacks.

    Attributes:
        NONE: Every client is honest
        INVERSE_SIGN: Attackers train normally, then negate their payload
        DATA_POISON: Attackers train on complemented labels
        RANDOM_PERTURBATION: Attackers send random payloads with honest statistics
        OMNISCIENT_OPPOSITE: Attackers send the negated honest aggregate
    """
    NONE = "none"
    INVERSE_SIGN = "inverse_sign"
    DATA_POISON = "data_poison"
    RANDOM_PERTURBATION = "random_perturbation"
    OMNISCIENT_OPPOSITE = "omniscient_opposite"

    @property
    def replaces_payload(self) -> bool:
        """True when the attacker's own training result is never used."""
        return self in (AttackKind.RANDOM_PERTURBATION, AttackKind.OMNISCIENT_OPPOSITE)


@dataclass(frozen=True)
class AttackPlan:
    """
    Attributes:
        kind: Attack applied by every attacker
        attacker_ids: Ids of the Byzantine clients
    """

    kind: AttackKind = AttackKind.NONE
    attacker_ids: FrozenSet[int] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "attacker_ids", frozenset(int(i) for i in self.attacker_ids))
        if any(i < 0 for i in self.attacker_ids):
            raise InvalidArgumentError("attacker ids must be non-negative")

    @property
    def active(self) -> bool:
        return self.kind is not AttackKind.NONE and bool(self.attacker_ids)

    def is_attacker(self, client_id: int) -> bool:
        return self.active and client_id in self.attacker_ids

    def validate(self, client_count: int) -> None:
        """
        Raises:
            ConfigurationError: If ids fall outside [0, M) or every client attacks
        """
        violations = []
        if any(i >= client_count for i in self.attacker_ids):
            violations.append(f"attack: attacker ids must lie in [0, {client_count})")
        if len(self.attacker_ids) >= client_count:
            violations.append(
                f"attack: {len(self.attacker_ids)} attackers leave no honest client among {client_count}"
            )
        if violations:
            raise ConfigurationError(violations)

    @classmethod
    def sample(cls, kind: AttackKind, attacker_count: int, client_count: int,
               rng: np.random.Generator) -> "AttackPlan":
        """Choose ``attacker_count`` attackers uniformly without replacement."""
        if attacker_count < 0 or attacker_count >= max(client_count, 1):
            raise ConfigurationError(
                [f"attack: num_attackers must lie in [0, {client_count}), got {attacker_count}"]
            )
        if kind is AttackKind.NONE or attacker_count == 0:
            return cls(kind, frozenset())
        ids = rng.choice(client_count, size=attacker_count, replace=False)
        plan = cls(kind, frozenset(int(i) for i in ids))
        plan.validate(client_count)
        logger.info(f"Attack plan: {kind.value} by clients {sorted(plan.attacker_ids)}")
        return plan


# =============================================================================
# Payload transforms
# =============================================================================

def inverse_sign(payload: Payload) -> Payload:
    """Negate every entry; ternary zeros stay zero."""
    if isinstance(payload, QuantizedWeights):
        return payload.negate()
    return -np.asarray(payload, dtype=float)


def omniscient_opposite(honest_aggregate: Payload) -> Payload:
    """The negation of the aggregate the honest clients would produce."""
    return inverse_sign(honest_aggregate)


def poison_labels(shard: DatasetShard, class_count: Optional[int] = None) -> DatasetShard:
    """
    Replace every label y by C - 1 - y; inputs are left untouched.

    The flip is deterministic, so no random generator is involved.
    """
    c = class_count if class_count is not None else shard.class_count
    if c < 2:
        raise InvalidArgumentError(f"label flipping needs at least 2 classes, got {c}")
    return shard.with_labels(c - 1 - shard.labels)


@dataclass(frozen=True)
class PayloadStatistics:
    """
    Per-coordinate mean and standard deviation of honest real-valued payloads.
    """

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def from_payloads(cls, payloads) -> "PayloadStatistics":
        matrix = np.asarray(payloads, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] < 1:
            raise InvalidArgumentError("payload statistics need at least one honest payload")
        return cls(mean=matrix.mean(axis=0), std=matrix.std(axis=0))


def random_perturbation(template: Payload, rng: np.random.Generator,
                        statistics: Optional[PayloadStatistics] = None) -> Payload:
    """
    Draw an attacker payload of the same type and length as ``template``.

    Binary payloads are uniform over {-1, +1}, ternary ones uniform over
    {-1, 0, +1}; real payloads are Gaussian with the supplied honest
    per-coordinate statistics. The template's values are never read.

    Raises:
        ConfigurationError: If a real payload is perturbed without statistics
    """
    if isinstance(template, QuantizedWeights):
        levels = template.levels.allowed
        return QuantizedWeights(template.levels, rng.choice(levels, size=template.d))
    if statistics is None:
        raise ConfigurationError(["attack: Gaussian random perturbation needs honest payload statistics"])
    d = np.asarray(template).size
    if statistics.mean.size != d or statistics.std.size != d:
        raise InvalidArgumentError(f"payload statistics have length {statistics.mean.size}, payload {d}")
    return statistics.mean + statistics.std * rng.normal(size=d)
