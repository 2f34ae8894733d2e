"""
Client-side local training.

This module provides:
- ClientState: a client's id, shard and latest latent weights
- LocalTrainingSettings: everything clients share within one run
- LocalResult: outcome of one client's local round
- local_train: latent-weight training from the broadcast soft vote, ending in
  stochastic rounding (voting aggregators)
- local_train_real: plain training of real weights (baseline aggregators)
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from src.data.dataset import DatasetShard
from src.errors import InvalidArgumentError
from src.federation.config import OptimizerConfig
from src.federation.optimizers import make_optimizer
from src.nn.network import Batch, LatentWeights, Model, latent_gradient, loss_and_grad_normalized
from src.nn.normalization import NormalizationFamily, NormalizationFn
from src.quantize.reconstruction import ClipBounds, reconstruct_from_soft_vote
from src.quantize.rounding import QuantizedWeights, QuantLevels, sto_round

logger = logging.getLogger(__name__)

Rounder = Callable[[np.ndarray, QuantLevels, np.random.Generator], QuantizedWeights]

IDENTITY = NormalizationFn(NormalizationFamily.IDENTITY)


@dataclass
class ClientState:
    """
    Attributes:
        id: Client id in [0, M)
        shard: Local training data (already label-flipped for poisoning attackers)
        latent: Latent weights at the end of the last local round
    """

    id: int
    shard: DatasetShard
    latent: Optional[LatentWeights] = None


@dataclass(frozen=True)
class LocalTrainingSettings:
    """
    Attributes:
        model: Shared network definition
        phi: Normalization function
        optimizer: Local optimizer configuration (state is rebuilt every round)
        tau: Local steps per round
        batch_size: Minibatch size (capped at the shard size)
        levels: Payload level set for the voting path
        clip: Soft-vote clipping applied before reconstructing latent weights
    """

    model: Model
    phi: NormalizationFn
    optimizer: OptimizerConfig
    tau: int
    batch_size: int
    levels: QuantLevels = QuantLevels.BINARY
    clip: ClipBounds = field(default_factory=ClipBounds)

    def __post_init__(self):
        if self.tau < 1:
            raise InvalidArgumentError(f"tau must be at least 1, got {self.tau}")
        if self.batch_size < 1:
            raise InvalidArgumentError(f"batch_size must be positive, got {self.batch_size}")


@dataclass
class LocalResult:
    """
    Attributes:
        client_id: Producing client
        weights: Final normalized weights (voting) or real weights (baselines)
        mean_loss: Mean minibatch loss over the tau steps
        grad_norm_sq: Squared gradient norm at the broadcast point
        payload: Uplink payload before any attack transform
    """

    client_id: int
    weights: np.ndarray
    mean_loss: float
    grad_norm_sq: float
    payload: Optional[Union[QuantizedWeights, np.ndarray]] = None


def draw_minibatch(shard: DatasetShard, batch_size: int, rng: np.random.Generator) -> Batch:
    """Sample min(batch_size, n) rows without replacement."""
    n = len(shard)
    if n == 0:
        raise InvalidArgumentError("cannot train on an empty shard")
    idx = rng.choice(n, size=min(batch_size, n), replace=False)
    return Batch(shard.inputs[idx], shard.labels[idx])


def _descend(client: ClientState, h_start: np.ndarray, w_start: np.ndarray, settings: LocalTrainingSettings,
             phi: NormalizationFn, batch_rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray, List[float], float]:
    if len(client.shard) == 0:
        raise InvalidArgumentError(f"client {client.id} has an empty shard")
    model = settings.model
    w_tilde = np.array(w_start, dtype=float)
    h = np.array(h_start, dtype=float)
    optimizer = make_optimizer(settings.optimizer)
    losses = []
    grad_norm_sq = 0.0
    for step in range(settings.tau):
        batch = draw_minibatch(client.shard, settings.batch_size, batch_rng)
        loss, grad = loss_and_grad_normalized(model, w_tilde, batch)
        if step == 0:
            grad_norm_sq = float(grad @ grad)
        losses.append(loss)
        h = optimizer.step(h, latent_gradient(grad, h, phi))
        w_tilde = np.asarray(phi.forward(h), dtype=float)
    logger.debug(f"client {client.id}: loss {losses[0]:.4f} -> {losses[-1]:.4f} over {settings.tau} steps")
    return h, w_tilde, losses, grad_norm_sq


def local_train(client: ClientState, p: np.ndarray, settings: LocalTrainingSettings,
                batch_rng: np.random.Generator, rounding_rng: np.random.Generator,
                rounder: Rounder = sto_round) -> LocalResult:
    """
    One round of FedVote local training.

    The client starts from w~ = 2p - 1 exactly, with latent weights
    reconstructed from the clipped soft vote, takes
    ``tau`` minibatch steps on the latent weights and stochastically rounds
    phi(h) into its payload.

    Args:
        client: Client to train
        p: Broadcast soft vote, entries in [0, 1]
        settings: Shared training settings
        batch_rng: Minibatch stream of this client and round
        rounding_rng: Rounding stream of this client and round
        rounder: Rounding function (replaceable for fault-injection tests)

    Raises:
        InvalidArgumentError: If the shard is empty, p has the wrong length or
            an entry outside [0, 1]
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (settings.model.d,):
        raise InvalidArgumentError(f"soft vote of length {p.size}, model has d={settings.model.d}")
    latent = reconstruct_from_soft_vote(p, settings.clip, settings.phi, settings.model.shapes)
    w_start = 2.0 * settings.clip.apply(p) - 1.0
    h, w_tilde, losses, grad_norm_sq = _descend(client, latent.values, w_start, settings, settings.phi, batch_rng)
    client.latent = LatentWeights(values=h, shapes=settings.model.shapes)
    payload = rounder(w_tilde, settings.levels, rounding_rng)
    return LocalResult(
        client_id=client.id,
        weights=w_tilde,
        mean_loss=float(np.mean(losses)),
        grad_norm_sq=grad_norm_sq,
        payload=payload,
    )


def local_train_real(client: ClientState, weights: np.ndarray, settings: LocalTrainingSettings,
                     batch_rng: np.random.Generator) -> LocalResult:
    """
    One round of local training on real weights (identity normalization).

    Returns the final weights; callers derive the update w - w_tau from them.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (settings.model.d,):
        raise InvalidArgumentError(f"weights of length {weights.size}, model has d={settings.model.d}")
    h, _, losses, grad_norm_sq = _descend(client, weights, weights, settings, IDENTITY, batch_rng)
    client.latent = LatentWeights(values=h, shapes=settings.model.shapes)
    return LocalResult(
        client_id=client.id,
        weights=h,
        mean_loss=float(np.mean(losses)),
        grad_norm_sq=grad_norm_sq,
    )
