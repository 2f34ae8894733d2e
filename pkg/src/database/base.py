"""
Database base configuration and shared declarative base.

This module provides:
- Single declarative base for the results tables
- Engine and session factory creation
- Database initialization

All model files MUST import Base from this module so every table shares
one metadata object.
"""
import logging
import os

from sqlalchemy import create_engine
from sqlalchemy.orm import declarative_base, sessionmaker

logger = logging.getLogger(__name__)

# ==============================================
# Single Source of Truth for Declarative Base
# ==============================================
Base = declarative_base()

RESULTS_DB_NAME = "results.db"


# ==============================================
# Database Path Configuration
# ==============================================
def results_db_url(output_dir: str) -> str:
    """SQLite URL of the results database inside ``output_dir`` (created if missing)."""
    os.makedirs(output_dir, exist_ok=True)
    return f"sqlite:///{os.path.abspath(os.path.join(output_dir, RESULTS_DB_NAME))}"


# ==============================================
# Engine and Session Factory Creation
# ==============================================
def get_engine(db_url: str, echo: bool = False):
    """
    Create SQLAlchemy engine.

    Args:
        db_url: Database URL
        echo: If True, log all SQL statements
    """
    engine = create_engine(db_url, echo=echo)
    logger.debug(f"Created engine for: {db_url}")
    return engine


def get_session_factory(engine):
    return sessionmaker(bind=engine)


def init_database(engine):
    """
    Create all tables registered with Base.

    Must run after the table modules are imported.
    """
    Base.metadata.create_all(engine)
    logger.debug("Results database initialized - all tables created")

