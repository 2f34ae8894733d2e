"""
Baseline aggregation and uplink encoding.

This module provides:
- fedavg_aggregate / fedpaq_round_update: the real-valued baselines
- update_signs: signSGD client payload
- encode_uplink / decode_uplink: the serialized form of every payload kind,
  whose byte lengths are what a round reports as uplink traffic
- apply_real_aggregator: the server step of every real-valued baseline
"""
import logging
from typing import List, Sequence, Union

import numpy as np

from src.errors import InvalidArgumentError
from src.federation.config import AggregatorKind
from src.quantize.payload import pack_float32, pack_qsgd, unpack_float32, unpack_qsgd
from src.quantize.qsgd import qsgd_quantize
from src.quantize.rounding import QuantizedWeights, QuantLevels
from src.vote.robust import coordinate_median, krum_select
from src.vote.voting import signsgd_majority

logger = logging.getLogger(__name__)

Payload = Union[QuantizedWeights, np.ndarray]


def _matrix(rows, name: str) -> np.ndarray:
    matrix = np.asarray(rows, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] < 1:
        raise InvalidArgumentError(f"{name} needs a non-empty M x d matrix")
    return matrix


def fedavg_aggregate(weights) -> np.ndarray:
    """Coordinate-wise arithmetic mean of the client rows."""
    return _matrix(weights, "fedavg_aggregate").mean(axis=0)


def fedpaq_round_update(updates, rng: np.random.Generator) -> np.ndarray:
    """
    Mean of the QSGD-quantized client updates.

    Rows are quantized in order from ``rng``; the result is an unbiased
    estimate of the FedAvg update.
    """
    matrix = _matrix(updates, "fedpaq_round_update")
    return np.mean([qsgd_quantize(row, rng) for row in matrix], axis=0)


def update_signs(delta: np.ndarray) -> QuantizedWeights:
    """sign(delta) as a binary payload; zero entries vote +1."""
    return QuantizedWeights(QuantLevels.BINARY, np.where(np.asarray(delta) >= 0, 1, -1))


# =============================================================================
# Uplink wire format
# =============================================================================

def encode_uplink(aggregator: AggregatorKind, payload: Payload) -> bytes:
    """
    Serialize a client payload for ``aggregator``.

    Voting and signSGD payloads are bit-packed, FedPAQ payloads carry a
    float32 norm plus 2-bit codes, the other baselines send float32 vectors.
    """
    if isinstance(payload, QuantizedWeights):
        return payload.to_bytes()
    if aggregator is AggregatorKind.FEDPAQ:
        return pack_qsgd(payload)
    return pack_float32(payload)


def decode_uplink(aggregator: AggregatorKind, data: bytes, d: int,
                  levels: QuantLevels = QuantLevels.BINARY) -> Payload:
    """
    Inverse of :func:`encode_uplink`.

    Raises:
        PayloadFormatError: If ``data`` does not have the expected length
    """
    if aggregator.is_voting:
        return QuantizedWeights.from_bytes(data, levels, d)
    if aggregator is AggregatorKind.SIGNSGD:
        return QuantizedWeights.from_bytes(data, QuantLevels.BINARY, d)
    if aggregator is AggregatorKind.FEDPAQ:
        return unpack_qsgd(data, d)
    return unpack_float32(data, d)


# =============================================================================
# Server step of the real-valued baselines
# =============================================================================

def apply_real_aggregator(aggregator: AggregatorKind, weights: np.ndarray, payloads: Sequence[Payload],
                          tiebreak_rng: np.random.Generator, server_lr: float = 0.001,
                          krum_f: int = 0) -> np.ndarray:
    """
    New global weights from the decoded baseline payloads.

    FedAvg payloads are client weights; every other baseline sends an update
    delta = w - w_tau (FedPAQ quantized, signSGD as signs).

    Raises:
        InvalidArgumentError: For a voting aggregator or an empty payload list
    """
    if aggregator.is_voting:
        raise InvalidArgumentError(f"{aggregator.value} is not a real-valued aggregator")
    if not payloads:
        raise InvalidArgumentError("aggregation needs at least one payload")
    if aggregator is AggregatorKind.SIGNSGD:
        signs = np.stack([p.values for p in payloads])
        return weights - server_lr * signsgd_majority(signs, tiebreak_rng)
    rows: List[np.ndarray] = [np.asarray(p, dtype=float) for p in payloads]
    if aggregator is AggregatorKind.FEDAVG:
        return fedavg_aggregate(rows)
    if aggregator is AggregatorKind.FEDPAQ:
        return weights - fedavg_aggregate(rows)
    if aggregator is AggregatorKind.MEDIAN:
        return weights - coordinate_median(rows)
    selected = krum_select(rows, krum_f)
    logger.debug(f"Krum selected payload {selected} of {len(rows)}")
    return weights - rows[selected]
