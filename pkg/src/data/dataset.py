"""
Labelled dataset container shared by loaders, partitioning and training.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from src.errors import InvalidArgumentError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DatasetShard:
    """
    Inputs and labels of a dataset or of one client's share of it.

    Attributes:
        inputs: Real matrix (n x d_in)
        labels: Integer vector (n), values in [0, class_count)
        class_count: Number of classes C
        image_shape: Optional (rows, cols) the feature vector was flattened from
    """

    inputs: np.ndarray
    labels: np.ndarray
    class_count: int
    image_shape: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        inputs = np.asarray(self.inputs, dtype=float)
        labels = np.asarray(self.labels, dtype=np.int64)
        if inputs.ndim != 2:
            raise InvalidArgumentError(f"dataset inputs must be 2-D, got shape {inputs.shape}")
        if labels.shape != (inputs.shape[0],):
            raise InvalidArgumentError(
                f"dataset has {inputs.shape[0]} rows but {labels.size} labels"
            )
        if self.class_count < 2:
            raise InvalidArgumentError(f"class_count must be at least 2, got {self.class_count}")
        if labels.size and (labels.min() < 0 or labels.max() >= self.class_count):
            raise InvalidArgumentError(f"labels must lie in [0, {self.class_count})")
        inputs.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return int(self.labels.size)

    @property
    def feature_count(self) -> int:
        return int(self.inputs.shape[1])

    def subset(self, indices) -> "DatasetShard":
        indices = np.asarray(indices, dtype=np.int64)
        return DatasetShard(self.inputs[indices], self.labels[indices], self.class_count, self.image_shape)

    def with_labels(self, labels) -> "DatasetShard":
        return DatasetShard(self.inputs, labels, self.class_count, self.image_shape)

    def class_histogram(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.class_count)

    def split(self, first: int) -> Tuple["DatasetShard", "DatasetShard"]:
        """Split into the first ``first`` rows and the rest."""
        if not 0 < first < len(self):
            raise InvalidArgumentError(f"cannot split {len(self)} samples at {first}")
        return self.subset(np.arange(first)), self.subset(np.arange(first, len(self)))


def class_histogram_frame(shards) -> pd.DataFrame:
    """One row per shard, one column per class, plus a ``total`` column."""
    if not shards:
        return pd.DataFrame()
    class_count = shards[0].class_count
    frame = pd.DataFrame(
        [shard.class_histogram() for shard in shards],
        columns=[f"class_{c}" for c in range(class_count)],
    )
    frame.index.name = "client"
    frame["total"] = frame.sum(axis=1)
    return frame
