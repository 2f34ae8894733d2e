"""
Test Suite for the SQLite results store

Tests:
- Table creation
- Recording a run and its rounds
- Reading rounds back as a DataFrame
- Per-client credibility round trip

Run with: pytest tests/database_testing/test_results_store.py -v
"""
import json
import shutil
import sys
import tempfile
import unittest
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from sqlalchemy import inspect

from src.database import ResultsManager, results_db_url
from src.database.base import RESULTS_DB_NAME, get_engine
from src.federation import AggregatorKind, ExperimentConfig, RoundMetrics


class TestResultsStore(unittest.TestCase):
    """Test ResultsManager against a temporary database."""

    @classmethod
    def setUpClass(cls):
        cls.test_dir = tempfile.mkdtemp()
        cls.db_url = results_db_url(cls.test_dir)
        cls.results = ResultsManager(cls.db_url)
        cls.config = ExperimentConfig(name="store", aggregator=AggregatorKind.FEDVOTE_OPTION_II)

    @classmethod
    def tearDownClass(cls):
        cls.results.close()
        shutil.rmtree(cls.test_dir, ignore_errors=True)

    def test_01_tables_created(self):
        self.assertTrue((Path(self.test_dir) / RESULTS_DB_NAME).is_file())
        tables = inspect(get_engine(self.db_url)).get_table_names()
        self.assertIn("experiment_run", tables)
        self.assertIn("round_record", tables)
        print("✓ Table creation passed")

    def test_02_record_run(self):
        run_id = self.results.start_run(self.config)
        self.results.record_round(run_id, RoundMetrics(0, 0.69, None, None, 500, 1.2, per_client_cr=[0.5, 0.75]))
        self.results.record_round(run_id, RoundMetrics(1, 0.41, 0.93, 0.91, 500, 0.8, per_client_cr=[0.6, 0.2]))
        self.results.finish_run(run_id)

        run = self.results.get_run(run_id)
        self.assertEqual(run.name, "store")
        self.assertEqual(run.aggregator, "fedvote_option_ii")
        self.assertEqual(run.rounds_completed, 2)
        self.assertTrue(run.completed)
        self.assertEqual(run.get_config()["aggregator"], "fedvote_option_ii")

        frame = self.results.rounds_frame(run_id)
        self.assertEqual(list(frame.index), [0, 1])
        self.assertAlmostEqual(frame.loc[1, "test_accuracy_quantized"], 0.91)
        self.assertEqual(json.loads(frame.loc[1, "per_client_cr"]), [0.6, 0.2])
        print("✓ Run recording passed")

    def test_03_unknown_run(self):
        self.assertIsNone(self.results.get_run(10_000))
        self.assertTrue(self.results.rounds_frame(10_000).empty)

    def test_04_runs_listed_in_order(self):
        first = self.results.start_run(self.config)
        second = self.results.start_run(self.config)
        ids = [r.id for r in self.results.list_runs()]
        self.assertLess(ids.index(first), ids.index(second))


if __name__ == "__main__":
    unittest.main(verbosity=2)
