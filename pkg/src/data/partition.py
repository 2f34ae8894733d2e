"""
Federated partitioning of a dataset into disjoint client shards.

This module provides:
- PartitionKind / PartitionSpec: i.i.d. or Dirichlet label-skewed splits
- partition_indices: the split as per-client index arrays
- partition: the split as DatasetShard objects
- export_partition: shards as IDX pairs plus a manifest.csv
"""
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from src.data.dataset import DatasetShard, class_histogram_frame
from src.data.idx_format import write_idx_pair
from src.errors import InvalidArgumentError

logger = logging.getLogger(__name__)


class PartitionKind(Enum):
    """
    Partitioning strategies.

    Attributes:
        IID: Shuffle and deal out equal-sized shards
        DIRICHLET: Per-client class proportions drawn from Dir(alpha)
    """
    IID = "iid"
    DIRICHLET = "dirichlet"


@dataclass(frozen=True)
class PartitionSpec:
    """
    Attributes:
        kind: Partitioning strategy
        client_count: Number of clients M
        alpha: Dirichlet concentration (ignored for IID); smaller is more skewed
    """

    kind: PartitionKind = PartitionKind.IID
    client_count: int = 10
    alpha: Optional[float] = 0.5

    def __post_init__(self):
        if self.client_count < 1:
            raise InvalidArgumentError(f"client_count must be positive, got {self.client_count}")
        if self.kind is PartitionKind.DIRICHLET and (self.alpha is None or not self.alpha > 0):
            raise InvalidArgumentError(f"Dirichlet alpha must be positive, got {self.alpha}")


def _iid(n: int, client_count: int, rng: np.random.Generator) -> List[np.ndarray]:
    return np.array_split(rng.permutation(n), client_count)


def _dirichlet(labels: np.ndarray, class_count: int, spec: PartitionSpec,
               rng: np.random.Generator) -> List[np.ndarray]:
    m = spec.client_count
    proportions = rng.dirichlet(np.full(class_count, spec.alpha), size=m)
    while np.any(np.isnan(proportions)):
        proportions = rng.dirichlet(np.full(class_count, spec.alpha), size=m)
    samples_per_client = np.array([len(s) for s in np.array_split(np.arange(labels.size), m)])

    client_indices = [[] for _ in range(m)]
    for c in range(class_count):
        class_idx = rng.permutation(np.flatnonzero(labels == c))
        if class_idx.size == 0:
            continue
        demand = proportions[:, c] * samples_per_client
        if demand.sum() <= 0:
            demand = samples_per_client.astype(float)
        demand = demand / demand.sum()
        cuts = (np.cumsum(demand) * class_idx.size).astype(int)[:-1]
        for client, part in enumerate(np.split(class_idx, cuts)):
            client_indices[client].extend(part.tolist())

    shards = [np.array(rng.permutation(idx), dtype=np.int64) for idx in client_indices]
    _top_up_empty_shards(shards, rng)
    return shards


def _top_up_empty_shards(shards: List[np.ndarray], rng: np.random.Generator) -> None:
    for client, shard in enumerate(shards):
        if shard.size:
            continue
        donor = int(np.argmax([s.size for s in shards]))
        pick = int(rng.integers(shards[donor].size))
        shards[client] = shards[donor][pick:pick + 1].copy()
        shards[donor] = np.delete(shards[donor], pick)
        logger.warning(f"partition: client {client} was empty, moved one sample from client {donor}")


def partition_indices(labels, class_count: int, spec: PartitionSpec,
                      rng: np.random.Generator) -> List[np.ndarray]:
    """
    Split sample indices into ``spec.client_count`` disjoint shards.

    Raises:
        InvalidArgumentError: If there are more clients than samples
    """
    labels = np.asarray(labels, dtype=np.int64)
    n = labels.size
    if spec.client_count > n:
        raise InvalidArgumentError(f"cannot split {n} samples across {spec.client_count} clients")
    if spec.kind is PartitionKind.IID:
        return [np.asarray(s, dtype=np.int64) for s in _iid(n, spec.client_count, rng)]
    return _dirichlet(labels, class_count, spec, rng)


def partition(dataset: DatasetShard, spec: PartitionSpec, rng: np.random.Generator) -> List[DatasetShard]:
    """Split ``dataset`` into client shards; the shards cover it exactly once."""
    shards = [
        dataset.subset(idx)
        for idx in partition_indices(dataset.labels, dataset.class_count, spec, rng)
    ]
    logger.info(
        f"Partitioned {len(dataset)} samples into {len(shards)} {spec.kind.value} shards "
        f"(sizes {min(len(s) for s in shards)}-{max(len(s) for s in shards)})"
    )
    return shards


MANIFEST_NAME = "manifest.csv"


def export_partition(dataset: DatasetShard, spec: PartitionSpec, rng: np.random.Generator,
                     out_dir) -> pd.DataFrame:
    """
    Partition ``dataset`` and write one IDX image/label pair per client plus
    manifest.csv with each client's file names and class histogram.

    Returns:
        The manifest as a DataFrame indexed by client
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    shards = partition(dataset, spec, rng)
    images, labels = [], []
    for client_id, shard in enumerate(shards):
        image_name = f"client_{client_id:03d}-images-idx.ubyte"
        label_name = f"client_{client_id:03d}-labels-idx.ubyte"
        write_idx_pair(out / image_name, out / label_name, shard)
        images.append(image_name)
        labels.append(label_name)

    manifest = class_histogram_frame(shards)
    manifest.insert(0, "labels_file", labels)
    manifest.insert(0, "images_file", images)
    manifest.to_csv(out / MANIFEST_NAME)
    logger.info(f"Wrote {len(shards)} shard pairs and {MANIFEST_NAME} to {out}")
    return manifest
