"""
Server state and the communication round.

This module provides:
- ServerState: broadcast soft vote (voting) or global weights (baselines),
  round counter and reputation
- Federation: the fixed ingredients of a run (clients, settings, attack, pool)
- initial_state: shared initialization from the master seed
- run_round: sampling, local training, attacks, uplink, aggregation, metrics
- evaluate: float and quantized test accuracy of a server state
"""
import logging
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.adversary.attacks import (
    AttackKind,
    AttackPlan,
    Payload,
    PayloadStatistics,
    inverse_sign,
    omniscient_opposite,
    random_perturbation,
)
from src.data.dataset import DatasetShard
from src.errors import ConfigurationError
from src.federation.aggregation import (
    apply_real_aggregator,
    decode_uplink,
    encode_uplink,
    fedavg_aggregate,
    update_signs,
)
from src.federation.client import (
    IDENTITY,
    ClientState,
    LocalResult,
    LocalTrainingSettings,
    Rounder,
    local_train,
    local_train_real,
)
from src.federation.config import AggregatorKind, EvalMode, ExperimentConfig
from src.federation.metrics import RoundMetrics
from src.federation.rng import StreamPurpose, stream
from src.federation.worker import ClientTrainingPool
from src.nn.network import Batch, accuracy
from src.quantize.qsgd import qsgd_quantize
from src.quantize.reconstruction import ClipBounds
from src.quantize.rounding import QuantizedWeights, QuantLevels, sign_round, sto_round
from src.vote.reputation import ReputationState, credibility_score, reputation_weights, update_reputation
from src.vote.voting import VoteBatch, plurality, soft_vote, weighted_soft_vote

logger = logging.getLogger(__name__)


@dataclass
class ServerState:
    """
    Attributes:
        aggregator: Aggregation rule
        round: Index of the next round to run
        p: Clipped soft vote (voting aggregators)
        weights: Global real weights (baselines)
        reputation: Client reputations (reputation-weighted voting only)
    """

    aggregator: AggregatorKind
    round: int = 0
    p: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    reputation: Optional[ReputationState] = None

    def float_weights(self) -> np.ndarray:
        """Normalized weights 2p - 1 for voting, the global weights otherwise."""
        if self.aggregator.is_voting:
            return 2.0 * self.p - 1.0
        return self.weights


@dataclass
class Federation:
    """
    Attributes:
        config: Validated experiment configuration
        settings: Local training settings shared by all clients
        clip: Soft-vote clipping bounds
        clients: Clients ordered by id
        attack: Byzantine attack plan
        test_set: Held-out evaluation data
        pool: Worker pool for local training
        rounder: Client rounding function
    """

    config: ExperimentConfig
    settings: LocalTrainingSettings
    clip: ClipBounds
    clients: List[ClientState]
    attack: AttackPlan
    test_set: DatasetShard
    pool: ClientTrainingPool = field(default_factory=ClientTrainingPool)
    rounder: Rounder = sto_round

    @property
    def client_count(self) -> int:
        return len(self.clients)

    @property
    def payload_levels(self) -> QuantLevels:
        if self.config.aggregator.is_voting:
            return self.config.quantizer
        return QuantLevels.BINARY


def initial_state(federation: Federation) -> ServerState:
    """
    Shared initialization: every client and the server derive the same
    starting point from the master seed.
    """
    config = federation.config
    model = federation.settings.model
    init_rng = stream(config.seeds.master, StreamPurpose.INIT, 1)
    aggregator = config.aggregator
    if aggregator.is_voting:
        latent = model.init_latent(init_rng, federation.settings.phi)
        w_tilde = federation.settings.phi.forward(latent.values)
        p = federation.clip.apply((w_tilde + 1.0) / 2.0)
        reputation = None
        if aggregator is AggregatorKind.FEDVOTE_OPTION_II:
            reputation = ReputationState.initial(federation.client_count, config.reputation.beta)
        return ServerState(aggregator=aggregator, p=p, reputation=reputation)
    weights = model.init_latent(init_rng, IDENTITY).values
    return ServerState(aggregator=aggregator, weights=weights)


def select_participants(client_count: int, count: int, rng: np.random.Generator) -> List[int]:
    """Uniform sample without replacement, returned in ascending order."""
    if count >= client_count:
        return list(range(client_count))
    return sorted(int(i) for i in rng.choice(client_count, size=count, replace=False))


# =============================================================================
# Client side of a round
# =============================================================================

def _train_client(federation: Federation, state: ServerState, client: ClientState) -> LocalResult:
    seed = federation.config.seeds.master
    k = state.round
    batch_rng = stream(seed, StreamPurpose.CLIENT_BATCH, client.id, k)
    rounding_rng = stream(seed, StreamPurpose.CLIENT_ROUNDING, client.id, k)
    if state.aggregator.is_voting:
        return local_train(client, state.p, federation.settings, batch_rng, rounding_rng, federation.rounder)

    result = local_train_real(client, state.weights, federation.settings, batch_rng)
    if state.aggregator is AggregatorKind.FEDAVG:
        result.payload = result.weights
        return result
    delta = state.weights - result.weights
    if state.aggregator is AggregatorKind.SIGNSGD:
        result.payload = update_signs(delta)
    elif state.aggregator is AggregatorKind.FEDPAQ:
        result.payload = qsgd_quantize(delta, rounding_rng)
    else:
        result.payload = delta
    return result


def _honest_aggregate(federation: Federation, state: ServerState, honest: Sequence[Payload]) -> Payload:
    # what an omniscient attacker negates
    seed = federation.config.seeds.master
    if state.aggregator.is_voting or state.aggregator is AggregatorKind.SIGNSGD:
        levels = federation.payload_levels
        if not honest:
            if state.aggregator.is_voting:
                return sign_round(state.float_weights(), levels)
            return QuantizedWeights(levels, np.ones(state.weights.size))
        batch = VoteBatch.from_payloads(list(honest))
        rng = stream(seed, StreamPurpose.ATTACK, state.round, federation.client_count)
        return plurality(batch, rng)
    if not honest:
        if state.aggregator is AggregatorKind.FEDAVG:
            return state.weights
        return np.zeros_like(state.weights)
    return fedavg_aggregate(list(honest))


def _attack_payloads(federation: Federation, state: ServerState, participants: Sequence[int],
                     payloads: Dict[int, Payload]) -> Dict[int, Payload]:
    attack = federation.attack
    if not attack.active:
        return payloads
    seed = federation.config.seeds.master
    k = state.round
    honest = [payloads[cid] for cid in participants if not attack.is_attacker(cid)]
    attackers = [cid for cid in participants if attack.is_attacker(cid)]
    if not attackers:
        return payloads

    attacked = dict(payloads)
    if attack.kind is AttackKind.INVERSE_SIGN:
        for cid in attackers:
            attacked[cid] = inverse_sign(payloads[cid])
    elif attack.kind is AttackKind.OMNISCIENT_OPPOSITE:
        opposite = omniscient_opposite(_honest_aggregate(federation, state, honest))
        for cid in attackers:
            attacked[cid] = opposite
    elif attack.kind is AttackKind.RANDOM_PERTURBATION:
        quantized = state.aggregator.is_voting or state.aggregator is AggregatorKind.SIGNSGD
        d = federation.settings.model.d
        if quantized:
            template = QuantizedWeights(federation.payload_levels, np.ones(d))
            statistics = None
        elif honest:
            template = np.zeros(d)
            statistics = PayloadStatistics.from_payloads(honest)
        else:
            logger.warning(f"Round {k}: no honest payload, random attackers use zero statistics")
            template = np.zeros(d)
            statistics = PayloadStatistics(mean=np.zeros(d), std=np.zeros(d))
        for cid in attackers:
            attacked[cid] = random_perturbation(template, stream(seed, StreamPurpose.ATTACK, k, cid), statistics)

    if state.aggregator is AggregatorKind.FEDPAQ and attack.kind.replaces_payload:
        # the wire format only carries QSGD-shaped vectors
        for cid in attackers:
            attacked[cid] = qsgd_quantize(attacked[cid], stream(seed, StreamPurpose.ATTACK, k, cid, 1))
    return attacked


# =============================================================================
# Round
# =============================================================================

def evaluate(federation: Federation, state: ServerState) -> Tuple[float, Optional[float]]:
    """
    Test accuracy of the float model and, for voting, of a rounded model.

    The rounded model is drawn from the evaluation seed's stream for this
    round, or sign-thresholded when ``eval_mode`` is "sign".
    """
    model = federation.settings.model
    batch = Batch(federation.test_set.inputs, federation.test_set.labels)
    w = state.float_weights()
    float_accuracy = accuracy(model, w, batch)
    if not state.aggregator.is_voting:
        return float_accuracy, None
    config = federation.config
    if config.eval_mode is EvalMode.SIGN:
        rounded = sign_round(w, config.quantizer)
    else:
        rounded = sto_round(w, config.quantizer, stream(config.seeds.eval, StreamPurpose.EVAL, state.round))
    return float_accuracy, accuracy(model, rounded.values.astype(float), batch)


def run_round(federation: Federation, state: ServerState) -> Tuple[ServerState, RoundMetrics]:
    """
    Run communication round ``state.round`` and return the next state.

    Raises:
        ConfigurationError: If reputation-weighted voting runs with partial participation
    """
    config = federation.config
    seed = config.seeds.master
    k = state.round
    aggregator = state.aggregator
    participants = select_participants(
        federation.client_count,
        config.participants_per_round,
        stream(seed, StreamPurpose.PARTICIPATION, k),
    )
    if aggregator is AggregatorKind.FEDVOTE_OPTION_II and len(participants) != federation.client_count:
        raise ConfigurationError(["aggregator fedvote_option_ii requires full participation"])

    attack = federation.attack
    trainers = [
        cid for cid in participants
        if not (attack.is_attacker(cid) and attack.kind.replaces_payload)
    ]
    results = federation.pool.run(
        {cid: partial(_train_client, federation, state, federation.clients[cid]) for cid in trainers}
    )
    payloads = _attack_payloads(
        federation, state, participants, {cid: results[cid].payload for cid in trainers}
    )

    d = federation.settings.model.d
    uplink_bytes = 0
    received: List[Payload] = []
    for cid in participants:
        data = encode_uplink(aggregator, payloads[cid])
        uplink_bytes += len(data)
        received.append(decode_uplink(aggregator, data, d, federation.payload_levels))

    tiebreak_rng = stream(seed, StreamPurpose.SERVER_TIEBREAK, k)
    per_client_cr = None
    next_state = replace(state, round=k + 1)
    if aggregator.is_voting:
        batch = VoteBatch.from_payloads(received, participants)
        if aggregator is AggregatorKind.FEDVOTE_OPTION_II:
            p = weighted_soft_vote(batch, reputation_weights(state.reputation))
            decision = plurality(batch, tiebreak_rng)
            per_client_cr = [credibility_score(batch.row(i), decision) for i in range(batch.M)]
            next_state.reputation = update_reputation(state.reputation, per_client_cr)
        else:
            p = soft_vote(batch)
        next_state.p = federation.clip.apply(p)
    else:
        next_state.weights = apply_real_aggregator(
            aggregator, state.weights, received, tiebreak_rng,
            server_lr=config.optimizer.server_lr, krum_f=config.krum_f,
        )

    test_accuracy = test_accuracy_quantized = None
    if (k + 1) % config.eval_every == 0 or k + 1 == config.rounds:
        test_accuracy, test_accuracy_quantized = evaluate(federation, next_state)

    trained = list(results.values())
    metrics = RoundMetrics(
        round=k,
        train_loss=float(np.mean([r.mean_loss for r in trained])) if trained else None,
        test_accuracy=test_accuracy,
        test_accuracy_quantized=test_accuracy_quantized,
        uplink_bytes_total=uplink_bytes,
        grad_norm_sq=float(np.mean([r.grad_norm_sq for r in trained])) if trained else None,
        per_client_cr=per_client_cr,
    )
    logger.info(
        f"Round {k + 1}/{config.rounds}: {len(participants)} participants, "
        f"loss {metrics.train_loss if metrics.train_loss is not None else float('nan'):.4f}, "
        f"uplink {uplink_bytes} bytes"
        + (f", accuracy {test_accuracy:.4f}" if test_accuracy is not None else "")
        + (f" (quantized {test_accuracy_quantized:.4f})" if test_accuracy_quantized is not None else "")
    )
    return next_state, metrics
