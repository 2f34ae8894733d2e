"""
Experiment configuration.

This module provides the dataclass tree describing one experiment, the
enumerations for every choice in it, and loading from TOML (or a resolved
JSON copy) with all violations reported together.

Example file::

    name = "fedvote-blobs"
    rounds = 30
    num_clients = 8
    aggregator = "fedvote_option_i"

    [dataset]
    kind = "synthetic"
    class_count = 2

    [optimizer]
    kind = "adam"
    eta = 0.02
"""
import dataclasses
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union, get_args, get_origin, get_type_hints

try:
    import tomllib  # Python 3.11+
except ImportError:
    import tomli as tomllib  # Fallback for older Python

from src.adversary.attacks import AttackKind
from src.data.partition import PartitionKind
from src.errors import ConfigurationError
from src.nn.network import Activation
from src.nn.normalization import NormalizationFamily
from src.quantize.rounding import QuantLevels

logger = logging.getLogger(__name__)

RESOLVED_CONFIG_NAME = "resolved_config.json"


class DatasetKind(Enum):
    """
    Attributes:
        SYNTHETIC: Gaussian blobs generated from the master seed
        IDX: Image/label files in IDX format
    """
    SYNTHETIC = "synthetic"
    IDX = "idx"


class AggregatorKind(Enum):
    """
    Aggregation rule of the server.

    Attributes:
        FEDVOTE_OPTION_I: Soft vote over quantized payloads
        FEDVOTE_OPTION_II: Reputation-weighted soft vote (full participation)
        FEDAVG: Mean of real-valued client weights
        SIGNSGD: Majority vote over signs of client updates
        FEDPAQ: Mean of QSGD-quantized client updates
        MEDIAN: Coordinate-wise median of client updates
        KRUM: Update of the client with the best Krum score
    """
    FEDVOTE_OPTION_I = "fedvote_option_i"
    FEDVOTE_OPTION_II = "fedvote_option_ii"
    FEDAVG = "fedavg"
    SIGNSGD = "signsgd"
    FEDPAQ = "fedpaq"
    MEDIAN = "median"
    KRUM = "krum"

    @property
    def is_voting(self) -> bool:
        return self in (AggregatorKind.FEDVOTE_OPTION_I, AggregatorKind.FEDVOTE_OPTION_II)


class OptimizerKind(Enum):
    SGD = "sgd"
    ADAM = "adam"


class EvalMode(Enum):
    """
    How the quantized model is scored.

    Attributes:
        STOCHASTIC: Stochastic rounding with the dedicated evaluation stream
        SIGN: Deterministic sign thresholding
    """
    STOCHASTIC = "stochastic"
    SIGN = "sign"


# =============================================================================
# Sections
# =============================================================================

@dataclass
class DatasetConfig:
    """
    Attributes:
        kind: Data source
        class_count: Number of classes C
        n_train / n_test: Synthetic sample counts
        input_dim: Synthetic feature dimension
        separation: Synthetic centroid distance
        noise_std: Synthetic noise level
        train_images / train_labels / test_images / test_labels: IDX paths
        max_train / max_test: Optional IDX subset sizes (first rows)
    """

    kind: DatasetKind = DatasetKind.SYNTHETIC
    class_count: int = 2
    n_train: int = 2000
    n_test: int = 500
    input_dim: int = 10
    separation: float = 10.0
    noise_std: float = 1.0
    train_images: Optional[str] = None
    train_labels: Optional[str] = None
    test_images: Optional[str] = None
    test_labels: Optional[str] = None
    max_train: Optional[int] = None
    max_test: Optional[int] = None

    def violations(self) -> List[str]:
        found = []
        if self.class_count < 2:
            found.append("dataset.class_count must be at least 2")
        if self.kind is DatasetKind.SYNTHETIC:
            if self.n_train < self.class_count or self.n_test < 1:
                found.append("dataset.n_train must be >= class_count and dataset.n_test >= 1")
            if self.input_dim < 1:
                found.append("dataset.input_dim must be positive")
            if not self.separation > 0 or not self.noise_std > 0:
                found.append("dataset.separation and dataset.noise_std must be positive")
        else:
            for name in ("train_images", "train_labels", "test_images", "test_labels"):
                value = getattr(self, name)
                if not value:
                    found.append(f"dataset.{name} is required for idx datasets")
                elif not Path(value).exists():
                    found.append(f"dataset.{name}: not found: {value}")
            for name in ("max_train", "max_test"):
                value = getattr(self, name)
                if value is not None and value < 1:
                    found.append(f"dataset.{name} must be positive")
        return found


@dataclass
class ModelConfig:
    hidden: List[int] = field(default_factory=lambda: [32])
    activation: Activation = Activation.RELU
    static_bn: bool = True
    epsilon_bn: float = 1e-5

    def violations(self) -> List[str]:
        found = []
        if not self.hidden or any(h < 1 for h in self.hidden):
            found.append("model.hidden must list at least one positive width")
        if not self.epsilon_bn > 0:
            found.append("model.epsilon_bn must be positive")
        return found


@dataclass
class PartitionConfig:
    kind: PartitionKind = PartitionKind.IID
    alpha: float = 0.5

    def violations(self) -> List[str]:
        if self.kind is PartitionKind.DIRICHLET and not self.alpha > 0:
            return ["partition.alpha must be positive"]
        return []


@dataclass
class OptimizerConfig:
    """
    Attributes:
        kind: Local optimizer
        eta: Local learning rate
        beta1 / beta2 / epsilon: Adam constants
        server_lr: Server step size of the signSGD baseline
    """

    kind: OptimizerKind = OptimizerKind.ADAM
    eta: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    server_lr: float = 0.001

    def violations(self) -> List[str]:
        found = []
        if not self.eta > 0:
            found.append("optimizer.eta must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            found.append("optimizer.beta1 and optimizer.beta2 must lie in [0, 1)")
        if not self.epsilon > 0:
            found.append("optimizer.epsilon must be positive")
        if not self.server_lr > 0:
            found.append("optimizer.server_lr must be positive")
        return found


@dataclass
class PhiConfig:
    family: NormalizationFamily = NormalizationFamily.TANH
    a: float = 1.5

    def violations(self) -> List[str]:
        found = []
        if not self.a > 0:
            found.append("phi.a must be positive")
        if self.family is NormalizationFamily.IDENTITY:
            found.append("phi.family 'identity' is reserved for real-valued baselines")
        return found


@dataclass
class ClipConfig:
    p_min: float = 0.001
    p_max: float = 0.999

    def violations(self) -> List[str]:
        found = []
        if not 0 < self.p_min < 0.5:
            found.append("clip.p_min must lie in (0, 0.5)")
        if not 0.5 < self.p_max < 1:
            found.append("clip.p_max must lie in (0.5, 1)")
        return found


@dataclass
class ReputationConfig:
    beta: float = 0.5

    def violations(self) -> List[str]:
        if not 0 < self.beta < 1:
            return ["reputation.beta must lie in (0, 1)"]
        return []


@dataclass
class AttackConfig:
    kind: AttackKind = AttackKind.NONE
    num_attackers: int = 0

    def violations(self) -> List[str]:
        if self.num_attackers < 0:
            return ["attack.num_attackers must not be negative"]
        return []


@dataclass
class SeedConfig:
    master: int = 0
    eval: int = 12345

    def violations(self) -> List[str]:
        if self.master < 0 or self.eval < 0:
            return ["seeds.master and seeds.eval must not be negative"]
        return []


_SECTIONS = {
    "dataset": DatasetConfig,
    "model": ModelConfig,
    "partition": PartitionConfig,
    "optimizer": OptimizerConfig,
    "phi": PhiConfig,
    "clip": ClipConfig,
    "reputation": ReputationConfig,
    "attack": AttackConfig,
    "seeds": SeedConfig,
}


@dataclass
class ExperimentConfig:
    """
    Full description of one simulation run.

    Attributes:
        name: Label stored with the results
        rounds: Communication rounds K (0 runs nothing)
        num_clients: Total clients M
        participation: Fraction of clients sampled per round, in (0, 1]
        tau: Local steps per round
        batch_size: Local minibatch size
        quantizer: Binary or ternary payloads (voting aggregators)
        aggregator: Server aggregation rule
        aggregator_f: Attacker count assumed by Krum (defaults to attack.num_attackers)
        eval_every: Evaluate every this many rounds (the last round always)
        eval_mode: Scoring of the quantized model
        threads: Worker threads for local training
        output_dir: Directory for metrics and results
    """

    name: str = "fedvote"
    rounds: int = 30
    num_clients: int = 8
    participation: float = 1.0
    tau: int = 40
    batch_size: int = 100
    quantizer: QuantLevels = QuantLevels.BINARY
    aggregator: AggregatorKind = AggregatorKind.FEDVOTE_OPTION_I
    aggregator_f: Optional[int] = None
    eval_every: int = 1
    eval_mode: EvalMode = EvalMode.STOCHASTIC
    threads: int = 1
    output_dir: str = "runs/fedvote"
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    partition: PartitionConfig = field(default_factory=PartitionConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    phi: PhiConfig = field(default_factory=PhiConfig)
    clip: ClipConfig = field(default_factory=ClipConfig)
    reputation: ReputationConfig = field(default_factory=ReputationConfig)
    attack: AttackConfig = field(default_factory=AttackConfig)
    seeds: SeedConfig = field(default_factory=SeedConfig)

    @property
    def krum_f(self) -> int:
        return self.aggregator_f if self.aggregator_f is not None else self.attack.num_attackers

    @property
    def participants_per_round(self) -> int:
        return max(1, int(round(self.participation * self.num_clients)))

    def violations(self) -> List[str]:
        found = []
        if self.rounds < 0:
            found.append("rounds must not be negative")
        if self.num_clients < 1:
            found.append("num_clients must be positive")
        if not 0 < self.participation <= 1:
            found.append("participation must lie in (0, 1]")
        if self.tau < 1:
            found.append("tau must be at least 1")
        if self.batch_size < 1:
            found.append("batch_size must be positive")
        if self.eval_every < 1:
            found.append("eval_every must be positive")
        if self.threads < 1:
            found.append("threads must be positive")
        if self.aggregator is AggregatorKind.FEDVOTE_OPTION_II and self.participation != 1.0:
            found.append("aggregator fedvote_option_ii requires full participation (participation = 1)")
        if self.num_clients >= 1 and self.attack.num_attackers >= self.num_clients:
            found.append("attack.num_attackers must be smaller than num_clients")
        if self.aggregator is AggregatorKind.KRUM and self.participants_per_round < self.krum_f + 3:
            found.append(
                f"aggregator krum needs at least aggregator_f + 3 = {self.krum_f + 3} participants per round"
            )
        if self.aggregator_f is not None and self.aggregator_f < 0:
            found.append("aggregator_f must not be negative")
        if self.dataset.kind is DatasetKind.SYNTHETIC and self.num_clients > self.dataset.n_train:
            found.append("num_clients must not exceed dataset.n_train")
        if self.model.static_bn and self.batch_size < 2:
            found.append("batch_size must be at least 2 when model.static_bn is enabled")
        if self.model.static_bn:
            if self.dataset.kind is DatasetKind.SYNTHETIC and self.dataset.n_test < 2:
                found.append("dataset.n_test must be at least 2 when model.static_bn is enabled")
            if self.dataset.max_test is not None and self.dataset.max_test < 2:
                found.append("dataset.max_test must be at least 2 when model.static_bn is enabled")
        for section in _SECTIONS:
            found.extend(getattr(self, section).violations())
        return found

    def validate(self) -> "ExperimentConfig":
        """
        Raises:
            ConfigurationError: Listing every violation found
        """
        found = self.violations()
        if found:
            raise ConfigurationError(found)
        return self

    def with_overrides(self, seed: Optional[int] = None, threads: Optional[int] = None,
                       output_dir: Optional[str] = None) -> "ExperimentConfig":
        """Copy with command-line overrides applied."""
        config = dataclasses.replace(self, seeds=dataclasses.replace(self.seeds))
        if seed is not None:
            config.seeds.master = seed
        if threads is not None:
            config.threads = threads
        if output_dir is not None:
            config.output_dir = str(output_dir)
        return config

    def to_dict(self) -> Dict[str, Any]:
        return _to_plain(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> "ExperimentConfig":
        """
        Build and validate a configuration from plain data.

        Raises:
            ConfigurationError: Listing unknown keys, type errors and range errors
        """
        violations: List[str] = []
        config = _build(cls, raw, "", violations)
        violations.extend(config.violations())
        if violations:
            raise ConfigurationError(violations)
        return config


# =============================================================================
# Conversion helpers
# =============================================================================

def _to_plain(value):
    if dataclasses.is_dataclass(value):
        return {f.name: _to_plain(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (list, tuple)):
        return [_to_plain(v) for v in value]
    return value


def _convert(value, hint, key: str, violations: List[str]):
    origin = get_origin(hint)
    if origin is Union:
        options = [a for a in get_args(hint) if a is not type(None)]
        if value is None:
            return None
        return _convert(value, options[0], key, violations)
    if origin in (list, List, tuple, Tuple):
        if not isinstance(value, (list, tuple)):
            violations.append(f"{key}: expected a list, got {type(value).__name__}")
            return value
        inner = get_args(hint)[0] if get_args(hint) else Any
        return [_convert(v, inner, f"{key}[{i}]", violations) for i, v in enumerate(value)]
    if isinstance(hint, type) and issubclass(hint, Enum):
        try:
            return hint(value)
        except ValueError:
            allowed = ", ".join(m.value for m in hint)
            violations.append(f"{key}: invalid value {value!r} (allowed: {allowed})")
            return value
    if hint is bool:
        if not isinstance(value, bool):
            violations.append(f"{key}: expected true/false, got {value!r}")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            violations.append(f"{key}: expected an integer, got {value!r}")
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            violations.append(f"{key}: expected a number, got {value!r}")
            return value
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            violations.append(f"{key}: expected a string, got {value!r}")
        return value
    return value


def _build(cls, raw, prefix: str, violations: List[str]):
    if not isinstance(raw, dict):
        violations.append(f"{prefix.rstrip('.') or 'config'}: expected a table")
        return cls()
    hints = get_type_hints(cls)
    known = [f.name for f in dataclasses.fields(cls)]
    for key in sorted(set(raw) - set(known)):
        violations.append(f"{prefix}{key}: unknown key")
    kwargs = {}
    for name in known:
        if name not in raw:
            continue
        hint = hints[name]
        if dataclasses.is_dataclass(hint):
            kwargs[name] = _build(hint, raw[name], f"{prefix}{name}.", violations)
            continue
        before = len(violations)
        value = _convert(raw[name], hint, f"{prefix}{name}", violations)
        # invalid fields fall back to their defaults
        if len(violations) == before:
            kwargs[name] = value
    return cls(**kwargs)


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    Load an experiment configuration from TOML or resolved JSON.

    Raises:
        FileNotFoundError: If the file does not exist
        ConfigurationError: On a parse error or any invalid field
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"not found: {path}")
    try:
        if path.suffix == ".json":
            with open(path, "r", encoding="utf-8") as f:
                raw = json.load(f)
        else:
            with open(path, "rb") as f:
                raw = tomllib.load(f)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as e:
        raise ConfigurationError([f"parse error in {path}: {e}"]) from e
    config = ExperimentConfig.from_dict(raw)
    logger.info(f"Loaded configuration '{config.name}' from {path}")
    return config


def write_resolved_config(config: ExperimentConfig, output_dir: Union[str, Path]) -> Path:
    """Write the configuration with every default materialized."""
    path = Path(output_dir) / RESOLVED_CONFIG_NAME
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(config.to_json() + "\n", encoding="utf-8")
    return path
