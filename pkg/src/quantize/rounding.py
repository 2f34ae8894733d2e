"""
Stochastic rounding of normalized weights to binary or ternary levels.

This module provides:
- QuantLevels: the supported level sets
- QuantizedWeights: an int8 vector over the declared level set
- sto_round_binary / sto_round_ternary: unbiased stochastic rounding
- sign_round: deterministic sign thresholding (evaluation alternative)
"""
import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from src.errors import DomainError, InvalidArgumentError

logger = logging.getLogger(__name__)


class QuantLevels(Enum):
    """
    Quantization level sets.

    Attributes:
        BINARY: {-1, +1}
        TERNARY: {-1, 0, +1}
    """
    BINARY = "binary"
    TERNARY = "ternary"

    @property
    def allowed(self) -> np.ndarray:
        if self is QuantLevels.BINARY:
            return np.array([-1, 1], dtype=np.int8)
        return np.array([-1, 0, 1], dtype=np.int8)


@dataclass(frozen=True)
class QuantizedWeights:
    """
    Quantized weight vector; the uplink payload of a FedVote client.

    Attributes:
        levels: Declared level set
        values: int8 vector whose entries all belong to ``levels``
    """

    levels: QuantLevels
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 1:
            raise InvalidArgumentError(f"quantized weights must be 1-D, got shape {values.shape}")
        if not np.all(np.isin(values, self.levels.allowed)):
            raise InvalidArgumentError(
                f"quantized weights contain values outside the {self.levels.value} level set"
            )
        object.__setattr__(self, "values", values.astype(np.int8, copy=True))
        self.values.setflags(write=False)

    @property
    def d(self) -> int:
        return int(self.values.size)

    def negate(self) -> "QuantizedWeights":
        return QuantizedWeights(self.levels, -self.values)

    def to_bytes(self) -> bytes:
        # payload.py imports this module
        from src.quantize.payload import pack_quantized
        return pack_quantized(self)

    @classmethod
    def from_bytes(cls, data: bytes, levels: QuantLevels, d: int) -> "QuantizedWeights":
        from src.quantize.payload import unpack_quantized
        return unpack_quantized(data, levels, d)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuantizedWeights):
            return NotImplemented
        return self.levels is other.levels and np.array_equal(self.values, other.values)

    __hash__ = None


def _check_unit_interval(w_tilde) -> np.ndarray:
    w = np.asarray(w_tilde, dtype=float)
    if w.ndim != 1:
        raise InvalidArgumentError(f"expected a 1-D weight vector, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise InvalidArgumentError("stochastic rounding: non-finite input")
    if np.any(np.abs(w) > 1.0):
        raise DomainError("stochastic rounding: |w| must not exceed 1")
    return w


def sto_round_binary(w_tilde, rng: np.random.Generator) -> QuantizedWeights:
    """
    Round each coordinate to +1 with probability (w + 1) / 2, else -1.

    Entries equal to +-1 come out as their sign with certainty.

    Raises:
        DomainError: If any |w| > 1
    """
    w = _check_unit_interval(w_tilde)
    u = rng.random(w.size)
    values = np.where(u < (w + 1.0) / 2.0, 1, -1).astype(np.int8)
    return QuantizedWeights(QuantLevels.BINARY, values)


def sto_round_ternary(w_tilde, rng: np.random.Generator) -> QuantizedWeights:
    """
    Round each coordinate to sign(w) with probability |w|, else 0.

    Raises:
        DomainError: If any |w| > 1
    """
    w = _check_unit_interval(w_tilde)
    u = rng.random(w.size)
    values = np.where(u < np.abs(w), np.sign(w), 0).astype(np.int8)
    return QuantizedWeights(QuantLevels.TERNARY, values)


def sto_round(w_tilde, levels: QuantLevels, rng: np.random.Generator) -> QuantizedWeights:
    if levels is QuantLevels.BINARY:
        return sto_round_binary(w_tilde, rng)
    return sto_round_ternary(w_tilde, rng)


def sign_round(w_tilde, levels: QuantLevels) -> QuantizedWeights:
    """
    Deterministic thresholding: sign(w), with 0 mapped to +1 for binary.

    Ternary keeps exact zeros and otherwise rounds |w| >= 0.5 away from zero.
    """
    w = _check_unit_interval(w_tilde)
    if levels is QuantLevels.BINARY:
        return QuantizedWeights(levels, np.where(w >= 0, 1, -1))
    return QuantizedWeights(levels, np.where(np.abs(w) >= 0.5, np.sign(w), 0))
