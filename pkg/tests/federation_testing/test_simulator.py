"""
Test Suite for full federated runs

Tests:
- Binary voting converges on separable synthetic data
- Reputation-weighted voting resists inverse-sign attackers
- Results are identical across thread counts and reruns
- Uplink byte accounting per aggregator
- Baselines and attack kinds run end to end; zero attackers change nothing
- Output directory artifacts (metrics.jsonl, resolved_config.json, results.db)

Run with: pytest tests/federation_testing/test_simulator.py -v
"""
import dataclasses
import shutil
import sys
import tempfile
import unittest
from pathlib import Path

import numpy as np

# Add project root to path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.adversary import AttackKind
from src.database import ResultsManager, results_db_url
from src.errors import ConfigurationError
from src.federation import (
    METRICS_FILE_NAME,
    AggregatorKind,
    AttackConfig,
    DatasetConfig,
    ExperimentConfig,
    ModelConfig,
    OptimizerConfig,
    OptimizerKind,
    PhiConfig,
    build_federation,
    initial_state,
    read_metrics,
    run,
    run_round,
    run_to_directory,
    select_participants,
)
from src.federation.config import RESOLVED_CONFIG_NAME
from src.quantize import QuantLevels


def _blobs_config(**overrides) -> ExperimentConfig:
    """Two well-separated Gaussian blobs, 8 clients, binary voting."""
    n_train = overrides.pop("n_train", 2000)
    n_test = overrides.pop("n_test", 500)
    input_dim = overrides.pop("input_dim", 10)
    settings = dict(
        name="blobs",
        rounds=30,
        num_clients=8,
        tau=20,
        batch_size=50,
        dataset=DatasetConfig(n_train=n_train, n_test=n_test, input_dim=input_dim, separation=10.0),
        model=ModelConfig(hidden=[32]),
        optimizer=OptimizerConfig(kind=OptimizerKind.ADAM, eta=0.02),
    )
    settings.update(overrides)
    return ExperimentConfig(**settings)


class TestConvergence(unittest.TestCase):
    """Test that voting and the baselines learn the synthetic task."""

    def test_01_binary_voting_converges(self):
        series = run(_blobs_config())
        self.assertEqual(len(series), 30)
        last = series[-1]
        self.assertGreaterEqual(last.test_accuracy, 0.95)
        self.assertGreaterEqual(last.test_accuracy_quantized, 0.95)
        self.assertLess(series[-1].train_loss, series[0].train_loss)
        print(f"✓ Binary voting: accuracy {last.test_accuracy:.3f}, quantized {last.test_accuracy_quantized:.3f}")

    def test_02_ternary_voting_runs(self):
        series = run(_blobs_config(rounds=5, quantizer=QuantLevels.TERNARY))
        self.assertEqual(len(series), 5)
        self.assertIsNotNone(series[-1].test_accuracy_quantized)

    def test_03_zero_rounds(self):
        self.assertEqual(run(_blobs_config(rounds=0)), [])

    def test_04_baselines_run(self):
        for aggregator in (AggregatorKind.FEDAVG, AggregatorKind.SIGNSGD, AggregatorKind.FEDPAQ,
                           AggregatorKind.MEDIAN, AggregatorKind.KRUM):
            with self.subTest(aggregator=aggregator.value):
                series = run(_blobs_config(rounds=3, aggregator=aggregator))
                self.assertEqual(len(series), 3)
                self.assertIsNone(series[-1].test_accuracy_quantized)
                self.assertIsNotNone(series[-1].test_accuracy)
                self.assertIsNone(series[-1].per_client_cr)

    def test_05_fedavg_learns(self):
        series = run(_blobs_config(rounds=10, aggregator=AggregatorKind.FEDAVG))
        self.assertGreaterEqual(series[-1].test_accuracy, 0.9)

    def test_06_eval_every(self):
        series = run(_blobs_config(rounds=5, eval_every=2))
        evaluated = [m.round for m in series if m.test_accuracy is not None]
        self.assertEqual(evaluated, [1, 3, 4])

    def test_07_normalization_sweep_gap(self):
        # four overlapping classes, so the rounded model does not match the float one
        def gap(a: float) -> float:
            gaps = []
            for seed in (0, 1, 2):
                config = _blobs_config(rounds=10).with_overrides(seed=seed)
                config.dataset = DatasetConfig(n_train=2000, n_test=500, class_count=4,
                                               input_dim=20, separation=3.0)
                config.phi = PhiConfig(a=a)
                last = run(config)[-1]
                gaps.append(last.test_accuracy - last.test_accuracy_quantized)
            return float(np.mean(gaps))

        soft, sharp = gap(0.5), gap(10.0)
        self.assertGreater(soft, 0.0)
        self.assertGreaterEqual(soft, sharp)
        print(f"✓ Float-vs-quantized gap: a=0.5 {soft:.3f}, a=10 {sharp:.3f}")


class TestByzantine(unittest.TestCase):
    """Test attacks and the reputation defense."""

    @staticmethod
    def _attacked(aggregator: AggregatorKind, rounds: int = 20) -> ExperimentConfig:
        return _blobs_config(
            rounds=rounds,
            num_clients=31,
            batch_size=20,
            n_train=3100,
            aggregator=aggregator,
            attack=AttackConfig(kind=AttackKind.INVERSE_SIGN, num_attackers=15),
        )

    def test_01_reputation_downweights_attackers(self):
        config = self._attacked(AggregatorKind.FEDVOTE_OPTION_II)
        federation = build_federation(config)
        state = initial_state(federation)
        np.testing.assert_allclose(state.reputation.nu, np.full(31, 1.0 / 31))
        for _ in range(5):
            state, metrics = run_round(federation, state)
        attackers = sorted(federation.attack.attacker_ids)
        honest = [i for i in range(31) if i not in federation.attack.attacker_ids]
        self.assertEqual(len(metrics.per_client_cr), 31)
        self.assertGreater(np.mean(state.reputation.nu[honest]), np.mean(state.reputation.nu[attackers]))
        self.assertGreater(np.mean([metrics.per_client_cr[i] for i in honest]),
                           np.mean([metrics.per_client_cr[i] for i in attackers]))
        print("✓ Reputation down-weighting passed")

    def test_02_weighted_voting_beats_plain_voting_under_attack(self):
        def final_accuracy(config):
            return np.mean([m.test_accuracy_quantized for m in run(config)[-5:]])

        weighted = final_accuracy(self._attacked(AggregatorKind.FEDVOTE_OPTION_II))
        plain = final_accuracy(self._attacked(AggregatorKind.FEDVOTE_OPTION_I))
        clean_config = self._attacked(AggregatorKind.FEDVOTE_OPTION_II)
        clean_config.attack = AttackConfig()
        clean = final_accuracy(clean_config)
        self.assertGreaterEqual(weighted, clean - 0.07)
        self.assertGreater(weighted, plain)
        print(f"✓ Under attack: weighted {weighted:.3f}, plain {plain:.3f}, attack-free {clean:.3f}")

    def test_03_every_attack_kind_runs(self):
        for kind in AttackKind:
            if kind is AttackKind.NONE:
                continue
            for aggregator in (AggregatorKind.FEDVOTE_OPTION_I, AggregatorKind.FEDPAQ, AggregatorKind.MEDIAN):
                with self.subTest(kind=kind.value, aggregator=aggregator.value):
                    config = _blobs_config(rounds=2, aggregator=aggregator,
                                           attack=AttackConfig(kind=kind, num_attackers=3))
                    self.assertEqual(len(run(config)), 2)

    def test_04_partial_participation_with_reputation_rejected(self):
        config = _blobs_config(aggregator=AggregatorKind.FEDVOTE_OPTION_II, participation=0.5)
        with self.assertRaises(ConfigurationError):
            run(config)

    def test_05_zero_attackers_matches_attack_free_run(self):
        for aggregator in (AggregatorKind.FEDVOTE_OPTION_II, AggregatorKind.FEDPAQ):
            clean = _blobs_config(rounds=3, aggregator=aggregator)
            reference = [m.to_json_line() for m in run(clean)]
            for kind in AttackKind:
                with self.subTest(aggregator=aggregator.value, kind=kind.value):
                    config = dataclasses.replace(clean, attack=AttackConfig(kind=kind, num_attackers=0))
                    self.assertEqual([m.to_json_line() for m in run(config)], reference)
        print("✓ Zero attackers leave the run unchanged")


class TestDeterminismAndAccounting(unittest.TestCase):
    """Test reproducibility, uplink accounting and output artifacts."""

    @classmethod
    def setUpClass(cls):
        cls.test_dir = tempfile.mkdtemp()

    @classmethod
    def tearDownClass(cls):
        shutil.rmtree(cls.test_dir, ignore_errors=True)

    def test_01_thread_count_does_not_change_results(self):
        base = _blobs_config(rounds=4, participation=0.5,
                             attack=AttackConfig(kind=AttackKind.RANDOM_PERTURBATION, num_attackers=2))
        serial = [m.to_json_line() for m in run(base.with_overrides(threads=1))]
        threaded = [m.to_json_line() for m in run(base.with_overrides(threads=4))]
        self.assertEqual(serial, threaded)
        print("✓ Thread-count determinism passed")

    def test_02_seed_changes_results(self):
        base = _blobs_config(rounds=2)
        a = [m.to_json_line() for m in run(base.with_overrides(seed=1))]
        b = [m.to_json_line() for m in run(base.with_overrides(seed=2))]
        self.assertNotEqual(a, b)

    def test_03_uplink_bytes(self):
        # input_dim 250 x hidden 32 gives d = 8000 quantized weights
        base = _blobs_config(rounds=1, tau=1, num_clients=40, participation=0.5, input_dim=250)
        expected = {
            (AggregatorKind.FEDVOTE_OPTION_I, QuantLevels.BINARY): 20 * 1000,
            (AggregatorKind.FEDVOTE_OPTION_I, QuantLevels.TERNARY): 20 * 2000,
            (AggregatorKind.SIGNSGD, QuantLevels.BINARY): 20 * 1000,
            (AggregatorKind.FEDAVG, QuantLevels.BINARY): 20 * 32000,
            (AggregatorKind.FEDPAQ, QuantLevels.BINARY): 20 * (4 + 2000),
        }
        for (aggregator, levels), total in expected.items():
            with self.subTest(aggregator=aggregator.value, levels=levels.value):
                config = dataclasses.replace(base, aggregator=aggregator, quantizer=levels)
                self.assertEqual(run(config)[0].uplink_bytes_total, total)

    def test_04_output_directory(self):
        config = _blobs_config(rounds=3, name="artifacts")
        first = Path(self.test_dir) / "first"
        second = Path(self.test_dir) / "second"
        run_to_directory(config, first)
        run_to_directory(config, second)

        self.assertEqual(len(read_metrics(first / METRICS_FILE_NAME)), 3)
        self.assertEqual((first / METRICS_FILE_NAME).read_bytes(), (second / METRICS_FILE_NAME).read_bytes())
        self.assertTrue((first / RESOLVED_CONFIG_NAME).is_file())

        with ResultsManager(results_db_url(str(first))) as results:
            runs = results.list_runs()
            self.assertEqual(len(runs), 1)
            self.assertTrue(runs[0].completed)
            self.assertEqual(runs[0].rounds_completed, 3)
            self.assertEqual(len(results.rounds_frame(runs[0].id)), 3)
        print("✓ Output artifacts passed")

    def test_05_tiny_shards_rejected_with_batch_norm(self):
        config = _blobs_config(n_train=8, batch_size=2)
        with self.assertRaises(ConfigurationError):
            run(config)

    def test_06_select_participants(self):
        rng = np.random.default_rng(0)
        chosen = select_participants(31, 16, rng)
        self.assertEqual(len(chosen), 16)
        self.assertEqual(chosen, sorted(set(chosen)))
        self.assertEqual(select_participants(5, 5, rng), [0, 1, 2, 3, 4])

    def test_07_single_test_sample_rejected_with_batch_norm(self):
        with self.assertRaises(ConfigurationError):
            run(_blobs_config(rounds=1, n_test=1))


if __name__ == "__main__":
    unittest.main(verbosity=2)
