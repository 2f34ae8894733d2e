"""
Federated training orchestration.

This module provides:
- ExperimentConfig and its sections, load_config
- Named random streams derived from the master seed
- Local training (local_train, local_train_real) and the worker pool
- Baseline aggregation (fedavg_aggregate, fedpaq_round_update) and uplink encoding
- ServerState, run_round and evaluation
- run / run_to_directory and the RoundMetrics series they produce
"""

from src.federation.config import (
    AggregatorKind,
    AttackConfig,
    ClipConfig,
    DatasetConfig,
    DatasetKind,
    EvalMode,
    ExperimentConfig,
    ModelConfig,
    OptimizerConfig,
    OptimizerKind,
    PartitionConfig,
    PhiConfig,
    ReputationConfig,
    SeedConfig,
    load_config,
    write_resolved_config,
)
from src.federation.rng import StreamPurpose, stream
from src.federation.optimizers import SGD, Adam, make_optimizer
from src.federation.client import (
    ClientState,
    LocalResult,
    LocalTrainingSettings,
    draw_minibatch,
    local_train,
    local_train_real,
)
from src.federation.aggregation import (
    apply_real_aggregator,
    decode_uplink,
    encode_uplink,
    fedavg_aggregate,
    fedpaq_round_update,
    update_signs,
)
from src.federation.worker import ClientTrainingPool
from src.federation.metrics import METRICS_FILE_NAME, MetricsWriter, RoundMetrics, metrics_frame, read_metrics
from src.federation.server import Federation, ServerState, evaluate, initial_state, run_round, select_participants
from src.federation.simulator import (
    build_federation,
    build_model,
    load_datasets,
    model_op_counts,
    run,
    run_to_directory,
)

__all__ = [
    'AggregatorKind',
    'AttackConfig',
    'ClipConfig',
    'DatasetConfig',
    'DatasetKind',
    'EvalMode',
    'ExperimentConfig',
    'ModelConfig',
    'OptimizerConfig',
    'OptimizerKind',
    'PartitionConfig',
    'PhiConfig',
    'ReputationConfig',
    'SeedConfig',
    'load_config',
    'write_resolved_config',
    'StreamPurpose',
    'stream',
    'SGD',
    'Adam',
    'make_optimizer',
    'ClientState',
    'LocalResult',
    'LocalTrainingSettings',
    'draw_minibatch',
    'local_train',
    'local_train_real',
    'apply_real_aggregator',
    'decode_uplink',
    'encode_uplink',
    'fedavg_aggregate',
    'fedpaq_round_update',
    'update_signs',
    'ClientTrainingPool',
    'METRICS_FILE_NAME',
    'MetricsWriter',
    'RoundMetrics',
    'metrics_frame',
    'read_metrics',
    'Federation',
    'ServerState',
    'evaluate',
    'initial_state',
    'run_round',
    'select_participants',
    'build_federation',
    'build_model',
    'load_datasets',
    'model_op_counts',
    'run',
    'run_to_directory',
]
