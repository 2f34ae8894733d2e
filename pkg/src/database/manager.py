"""
Results Manager - single point of access to the results database.

This module provides the ResultsManager class which handles:
- Session management
- Transaction management
- Recording runs and rounds
- Reading rounds back as pandas DataFrames

Usage:
    with ResultsManager(results_db_url("runs/blobs")) as results:
        run_id = results.start_run(config)
        results.record_round(run_id, metrics)
        results.finish_run(run_id)
        frame = results.rounds_frame(run_id)
"""
import logging
from contextlib import contextmanager
from typing import TYPE_CHECKING, List, Optional

import pandas as pd
from sqlalchemy import text
from sqlalchemy.orm import Session, scoped_session

from src.database.base import get_engine, get_session_factory, init_database
from src.database.results_tables import ExperimentRun, RoundRecord

if TYPE_CHECKING:
    from src.federation.config import ExperimentConfig
    from src.federation.metrics import RoundMetrics

logger = logging.getLogger(__name__)


class ResultsManager:
    """
    Stores experiment runs and their per-round metrics.

    Attributes:
        db_url: Database URL
    """

    def __init__(self, db_url: str):
        self.db_url = db_url
        self._engine = get_engine(db_url)
        self._session_factory = get_session_factory(self._engine)
        self._scoped_session = scoped_session(self._session_factory)
        init_database(self._engine)
        logger.info(f"ResultsManager initialized: {self.db_url}")

    @contextmanager
    def session_scope(self):
        """
        Transactional scope: commits on success, rolls back on error.

        Yields:
            SQLAlchemy Session object
        """
        session: Session = self._scoped_session()
        try:
            yield session
            session.commit()
            logger.debug("Transaction committed")
        except Exception as e:
            session.rollback()
            logger.error(f"Transaction rolled back due to error: {e}")
            raise
        finally:
            session.close()

    # ============================================================
    # Recording
    # ============================================================

    def start_run(self, config: "ExperimentConfig") -> int:
        """Insert a run row and return its id."""
        with self.session_scope() as session:
            run = ExperimentRun(
                name=config.name,
                aggregator=config.aggregator.value,
                master_seed=config.seeds.master,
                config_json=config.to_json(),
            )
            session.add(run)
            session.flush()
            run_id = run.id
        logger.info(f"Started run {run_id} ('{config.name}', {config.aggregator.value})")
        return run_id

    def record_round(self, run_id: int, metrics: "RoundMetrics"):
        with self.session_scope() as session:
            record = RoundRecord(
                run_id=run_id,
                round=metrics.round,
                train_loss=metrics.train_loss,
                test_accuracy=metrics.test_accuracy,
                test_accuracy_quantized=metrics.test_accuracy_quantized,
                uplink_bytes_total=metrics.uplink_bytes_total,
                grad_norm_sq=metrics.grad_norm_sq,
            )
            record.set_per_client_cr(metrics.per_client_cr)
            session.add(record)
            run = session.get(ExperimentRun, run_id)
            run.rounds_completed = metrics.round + 1

    def finish_run(self, run_id: int):
        with self.session_scope() as session:
            session.get(ExperimentRun, run_id).completed = True

    # ============================================================
    # Reading
    # ============================================================

    def get_run(self, run_id: int) -> Optional[ExperimentRun]:
        session = self._session_factory()
        try:
            run = session.get(ExperimentRun, run_id)
            if run:
                # Make instance independent of session
                session.expunge(run)
            return run
        finally:
            session.close()

    def list_runs(self) -> List[ExperimentRun]:
        session = self._session_factory()
        try:
            runs = session.query(ExperimentRun).order_by(ExperimentRun.id).all()
            for run in runs:
                session.expunge(run)
            return runs
        finally:
            session.close()

    def rounds_frame(self, run_id: int) -> pd.DataFrame:
        """All rounds of ``run_id`` as a DataFrame indexed by round."""
        query = text(
            "SELECT round, train_loss, test_accuracy, test_accuracy_quantized, "
            "uplink_bytes_total, grad_norm_sq, per_client_cr "
            "FROM round_record WHERE run_id = :run_id ORDER BY round"
        )
        with self._engine.connect() as connection:
            return pd.read_sql_query(query, connection, params={"run_id": run_id}, index_col="round")

    # ============================================================
    # Lifecycle Management
    # ============================================================

    def close(self):
        self._scoped_session.remove()
        self._engine.dispose()
        logger.info("ResultsManager closed - all sessions removed")

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()
