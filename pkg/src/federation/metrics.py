"""
Per-round metrics and their JSONL file.

One JSON object per line, fields in declaration order, no timestamps, so
two runs with the same configuration produce byte-identical files.
"""
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import List, Optional, Union

import pandas as pd

logger = logging.getLogger(__name__)

METRICS_FILE_NAME = "metrics.jsonl"


@dataclass
class RoundMetrics:
    """
    Attributes:
        round: Zero-based round index
        train_loss: Mean local minibatch loss of the trained participants
        test_accuracy: Accuracy of the float model (None on rounds that are not evaluated)
        test_accuracy_quantized: Accuracy of a rounded model (None for real-valued baselines)
        uplink_bytes_total: Serialized payload bytes of all participants
        grad_norm_sq: Mean squared gradient norm at the broadcast point
        per_client_cr: Credibility score per client id (reputation-weighted voting only)
    """

    round: int
    train_loss: Optional[float]
    test_accuracy: Optional[float]
    test_accuracy_quantized: Optional[float]
    uplink_bytes_total: int
    grad_norm_sq: Optional[float]
    per_client_cr: Optional[List[float]] = field(default=None)

    def to_json_line(self) -> str:
        return json.dumps(asdict(self), allow_nan=False)

    @classmethod
    def from_json_line(cls, line: str) -> "RoundMetrics":
        raw = json.loads(line)
        return cls(**{f.name: raw.get(f.name) for f in fields(cls)})


class MetricsWriter:
    """
    Appends one line per round and flushes it immediately.

    Usage:
        with MetricsWriter(output_dir / "metrics.jsonl") as writer:
            writer.write(metrics)
    """

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._file = open(self.path, "w", encoding="utf-8", newline="\n")
        self.lines_written = 0

    def write(self, metrics: RoundMetrics):
        self._file.write(metrics.to_json_line() + "\n")
        self._file.flush()
        self.lines_written += 1

    def close(self):
        if not self._file.closed:
            self._file.close()
            logger.info(f"Wrote {self.lines_written} round(s) to {self.path}")

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()
        return False


def read_metrics(path: Union[str, Path]) -> List[RoundMetrics]:
    with open(path, "r", encoding="utf-8") as f:
        return [RoundMetrics.from_json_line(line) for line in f if line.strip()]


def metrics_frame(series: List[RoundMetrics]) -> pd.DataFrame:
    """Metrics series as a DataFrame indexed by round, with cumulative uplink bytes."""
    columns = [f.name for f in fields(RoundMetrics)]
    frame = pd.DataFrame([asdict(m) for m in series], columns=columns).set_index("round")
    frame["uplink_bytes_cumulative"] = frame["uplink_bytes_total"].cumsum()
    return frame
