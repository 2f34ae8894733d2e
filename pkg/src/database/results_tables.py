"""
Results table models - ExperimentRun and RoundRecord.

One ExperimentRun per simulation; one RoundRecord per communication round.
"""
import json
from datetime import datetime

from sqlalchemy import Boolean, Column, DateTime, Float, ForeignKey, Integer, String, Text
from sqlalchemy.orm import relationship

from src.database.base import Base


class ExperimentRun(Base):
    """
    A single simulation run and the configuration that produced it.
    """
    __tablename__ = 'experiment_run'

    id = Column(Integer, primary_key=True, autoincrement=True)
    name = Column(String, nullable=False)
    aggregator = Column(String, nullable=False)
    master_seed = Column(Integer, nullable=False)
    config_json = Column(Text, nullable=False)
    created_at = Column(DateTime, default=datetime.utcnow)
    rounds_completed = Column(Integer, default=0, nullable=False)
    completed = Column(Boolean, default=False, nullable=False)

    rounds = relationship("RoundRecord", back_populates="run", cascade="all, delete-orphan",
                          order_by="RoundRecord.round")

    def get_config(self) -> dict:
        return json.loads(self.config_json)


class RoundRecord(Base):
    """
    Metrics of one round; mirrors a line of metrics.jsonl.
    """
    __tablename__ = 'round_record'

    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(Integer, ForeignKey('experiment_run.id'), nullable=False)
    round = Column(Integer, nullable=False)
    train_loss = Column(Float, nullable=True)
    test_accuracy = Column(Float, nullable=True)
    test_accuracy_quantized = Column(Float, nullable=True)
    uplink_bytes_total = Column(Integer, nullable=False)
    grad_norm_sq = Column(Float, nullable=True)

    # Credibility per client id, stored as a JSON list
    per_client_cr = Column(Text, nullable=True)

    run = relationship("ExperimentRun", back_populates="rounds")

    def set_per_client_cr(self, scores):
        self.per_client_cr = json.dumps(list(scores)) if scores is not None else None
