"""
Database package - results store for simulation runs.

This package provides:
- ResultsManager: Main interface for recording and reading runs
- Model classes: ExperimentRun, RoundRecord
- Base configuration: Base, results_db_url, init_database

Usage:
    from src.database import ResultsManager, results_db_url

    with ResultsManager(results_db_url("runs/blobs")) as results:
        frame = results.rounds_frame(run_id=1)
"""

from src.database.manager import ResultsManager
from src.database.results_tables import ExperimentRun, RoundRecord
from src.database.base import Base, init_database, results_db_url

__all__ = [
    'ResultsManager',
    'ExperimentRun',
    'RoundRecord',
    'Base',
    'init_database',
    'results_db_url',
]
