"""
Dataset sourcing and federated partitioning.

This module provides:
- DatasetShard: labelled data container
- synthetic_classification: Gaussian-blob generator
- read_idx, load_idx, write_idx, write_idx_pair: IDX file support
- PartitionKind, PartitionSpec, partition, partition_indices, export_partition: client splits
"""

from src.data.dataset import DatasetShard, class_histogram_frame
from src.data.synthetic import synthetic_classification
from src.data.idx_format import (
    IMAGE_MAGIC,
    LABEL_MAGIC,
    load_idx,
    read_idx,
    write_idx,
    write_idx_pair,
)
from src.data.partition import (
    MANIFEST_NAME,
    PartitionKind,
    PartitionSpec,
    export_partition,
    partition,
    partition_indices,
)

__all__ = [
    'DatasetShard',
    'class_histogram_frame',
    'synthetic_classification',
    'IMAGE_MAGIC',
    'LABEL_MAGIC',
    'load_idx',
    'read_idx',
    'write_idx',
    'write_idx_pair',
    'MANIFEST_NAME',
    'PartitionKind',
    'PartitionSpec',
    'export_partition',
    'partition',
    'partition_indices',
]
