"""
Experiment driver: builds a federation from a configuration and runs it.

This module provides:
- load_datasets: train/test data for a configuration
- build_model / model_op_counts: the configured network and its operation counts
- build_federation: clients, model, attack plan and settings from the master seed
- run: K rounds, returning the metrics series
- run_to_directory: run plus metrics.jsonl, resolved_config.json and results.db
"""
import logging
from pathlib import Path
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from src.adversary.attacks import AttackKind, AttackPlan, poison_labels
from src.data.dataset import DatasetShard
from src.data.idx_format import load_idx
from src.data.partition import PartitionSpec, partition
from src.data.synthetic import synthetic_classification
from src.database.base import results_db_url
from src.database.manager import ResultsManager
from src.errors import ConfigurationError, InvalidArgumentError
from src.federation.client import ClientState, LocalTrainingSettings, Rounder
from src.federation.config import DatasetKind, ExperimentConfig, write_resolved_config
from src.federation.metrics import METRICS_FILE_NAME, MetricsWriter, RoundMetrics
from src.federation.rng import StreamPurpose, stream
from src.federation.server import Federation, initial_state, run_round
from src.federation.worker import ClientTrainingPool
from src.nn.network import Model
from src.nn.normalization import NormalizationFn
from src.nn.op_count import op_count_table
from src.quantize.reconstruction import ClipBounds
from src.quantize.rounding import sto_round

logger = logging.getLogger(__name__)


def _head(dataset: DatasetShard, limit: Optional[int]) -> DatasetShard:
    if limit is None or limit >= len(dataset):
        return dataset
    return dataset.subset(np.arange(limit))


def load_datasets(config: ExperimentConfig) -> Tuple[DatasetShard, DatasetShard]:
    """
    Train and test sets for ``config``.

    Synthetic data is generated once from the data stream and split; IDX
    data is read from the four configured files.

    Raises:
        ConfigurationError: If IDX labels fall outside the configured classes
    """
    ds = config.dataset
    if ds.kind is DatasetKind.SYNTHETIC:
        full = synthetic_classification(
            ds.n_train + ds.n_test,
            ds.input_dim,
            ds.class_count,
            ds.separation,
            stream(config.seeds.master, StreamPurpose.DATA),
            noise_std=ds.noise_std,
        )
        return full.split(ds.n_train)
    try:
        train = _head(load_idx(ds.train_images, ds.train_labels, ds.class_count), ds.max_train)
        test = _head(load_idx(ds.test_images, ds.test_labels, ds.class_count), ds.max_test)
    except InvalidArgumentError as e:
        raise ConfigurationError([f"dataset: {e}"]) from e
    return train, test


def build_model(config: ExperimentConfig, train: DatasetShard) -> Model:
    """The configured network, sized for ``train``, with its final layer drawn from the init stream."""
    return Model.build(
        train.feature_count,
        config.model.hidden,
        train.class_count,
        stream(config.seeds.master, StreamPurpose.INIT, 0),
        activation=config.model.activation,
        uses_static_bn=config.model.static_bn,
        epsilon_bn=config.model.epsilon_bn,
    )


def model_op_counts(config: ExperimentConfig, batch_size: int = 1) -> pd.DataFrame:
    """Float vs. binary forward-pass operation counts and energy for the configured model."""
    train, _ = load_datasets(config)
    return op_count_table(build_model(config, train), batch_size=batch_size)


def build_federation(config: ExperimentConfig, pool: Optional[ClientTrainingPool] = None,
                     rounder: Rounder = sto_round) -> Federation:
    """
    Assemble every fixed ingredient of a run.

    Raises:
        ConfigurationError: If the data cannot be split across the clients, or a
            shard or the test set is too small for static batch norm
    """
    seed = config.seeds.master
    train, test = load_datasets(config)
    spec = PartitionSpec(config.partition.kind, config.num_clients, config.partition.alpha)
    try:
        shards = partition(train, spec, stream(seed, StreamPurpose.PARTITION))
    except InvalidArgumentError as e:
        raise ConfigurationError([f"partition: {e}"]) from e
    if config.model.static_bn:
        if len(test) < 2:
            raise ConfigurationError([f"dataset: test set holds {len(test)} sample(s), static batch norm needs 2"])
        small = [i for i, s in enumerate(shards) if len(s) < 2]
        if small:
            raise ConfigurationError(
                [f"partition: clients {small} hold fewer than 2 samples, static batch norm needs 2"]
            )

    model = build_model(config, train)
    attack = AttackPlan.sample(
        config.attack.kind, config.attack.num_attackers, config.num_clients,
        stream(seed, StreamPurpose.ATTACK),
    )
    clients = []
    for client_id, shard in enumerate(shards):
        if attack.kind is AttackKind.DATA_POISON and attack.is_attacker(client_id):
            shard = poison_labels(shard)
        clients.append(ClientState(id=client_id, shard=shard))

    clip = ClipBounds(config.clip.p_min, config.clip.p_max)
    settings = LocalTrainingSettings(
        model=model,
        phi=NormalizationFn(config.phi.family, config.phi.a),
        optimizer=config.optimizer,
        tau=config.tau,
        batch_size=config.batch_size,
        levels=config.quantizer,
        clip=clip,
    )
    logger.info(
        f"Federation '{config.name}': {config.num_clients} clients, d={model.d}, "
        f"aggregator {config.aggregator.value}, attack {attack.kind.value} x{len(attack.attacker_ids)}"
    )
    return Federation(
        config=config,
        settings=settings,
        clip=clip,
        clients=clients,
        attack=attack,
        test_set=test,
        pool=pool if pool is not None else ClientTrainingPool(),
        rounder=rounder,
    )


def run(config: ExperimentConfig, on_round: Optional[Callable[[RoundMetrics], None]] = None,
        rounder: Rounder = sto_round) -> List[RoundMetrics]:
    """
    Run ``config.rounds`` rounds and return one RoundMetrics per round.

    The result depends only on the configuration (including its seeds),
    never on ``config.threads``.

    Raises:
        ConfigurationError: Listing every violation of an invalid configuration
    """
    config.validate()
    if config.rounds == 0:
        logger.info("rounds = 0, nothing to run")
        return []
    series: List[RoundMetrics] = []
    with ClientTrainingPool(config.threads) as pool:
        federation = build_federation(config, pool, rounder)
        state = initial_state(federation)
        for _ in range(config.rounds):
            state, metrics = run_round(federation, state)
            series.append(metrics)
            if on_round is not None:
                on_round(metrics)
    return series


def run_to_directory(config: ExperimentConfig,
                     output_dir: Optional[Union[str, Path]] = None) -> List[RoundMetrics]:
    """
    Run ``config`` and write its artifacts to ``output_dir`` (default: config.output_dir).

    Writes resolved_config.json before the first round, appends one
    metrics.jsonl line per round and records the run in results.db.
    """
    config.validate()
    output = Path(output_dir if output_dir is not None else config.output_dir)
    write_resolved_config(config, output)
    with MetricsWriter(output / METRICS_FILE_NAME) as writer, \
            ResultsManager(results_db_url(str(output))) as results:
        run_id = results.start_run(config)

        def record(metrics: RoundMetrics):
            writer.write(metrics)
            results.record_round(run_id, metrics)

        series = run(config, on_round=record)
        results.finish_run(run_id)
    return series
